#pragma once

#include "evolab/opalg/grid.hpp"
#include "evolab/opalg/operator.hpp"

#include <json.hpp>

namespace evolab::opalg {

// Fixture schema (version 1):
//   grid:      {dimension, extent:[x0,x1,y0,y1], n_per_dim, boundary:[tag x4]}
//   operator:  {rows, cols, matrix:[row-major], norms:{weights, q, d_reference:[row-major]},
//               grid?: <grid>}
//   observation: {kind, rows, cols, matrix:[row-major], y_weights}
// Tags are "interior", "dirichlet0", "neumann".

nlohmann::json to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiscreteOperator& op);
DiscreteOperator operator_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ObservationMap& c);
ObservationMap observation_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols);

}  // namespace evolab::opalg
