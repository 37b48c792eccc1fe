#include "evolab/opalg/serialize.hpp"

#include "evolab/error.hpp"

namespace evolab::opalg {

using nlohmann::json;

namespace {

std::string tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Dirichlet0: return "dirichlet0";
    case BoundaryTag::Neumann: return "neumann";
  }
  return "interior";
}

BoundaryTag tag_from(const std::string& s) {
  if (s == "dirichlet0") return BoundaryTag::Dirichlet0;
  if (s == "neumann") return BoundaryTag::Neumann;
  if (s == "interior") return BoundaryTag::Interior;
  throw PreconditionError("unknown boundary tag '" + s + "'");
}

ObservationKind kind_from(const std::string& s) {
  for (auto k : {ObservationKind::PointEvaluation, ObservationKind::BoundaryTrace, ObservationKind::Identity,
                 ObservationKind::Custom})
    if (to_string(k) == s) return k;
  throw PreconditionError("unknown observation kind '" + s + "'");
}

Vector vector_from(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

// Grids round-trip through their construction parameters; side tags are recovered from
// the node tags of one representative node per side.
json to_json(const Grid& grid) {
  const auto& e = grid.extent();
  json sides = json::array();
  const int n = grid.n_per_dim();
  auto side_tag = [&](int i, int j) { return tag_name(grid.tags()[grid.node_index(i, j)]); };
  if (grid.dimension() == 1) {
    sides = {side_tag(0, 0), side_tag(n - 1, 0), "dirichlet0", "dirichlet0"};
  } else {
    int mid = n / 2;
    sides = {side_tag(0, mid), side_tag(n - 1, mid), side_tag(mid, 0), side_tag(mid, n - 1)};
  }
  return json{{"dimension", grid.dimension()},
              {"extent", {e.x0, e.x1, e.y0, e.y1}},
              {"n_per_dim", n},
              {"boundary", sides}};
}

Grid grid_from_json(const json& j) {
  auto ext = j.at("extent").get<std::vector<double>>();
  if (ext.size() != 4) throw PreconditionError("grid.extent must have 4 entries");
  BoundarySpec tags;
  auto b = j.at("boundary").get<std::vector<std::string>>();
  if (b.size() != 4) throw PreconditionError("grid.boundary must have 4 entries");
  for (std::size_t k = 0; k < 4; ++k) tags.sides[k] = tag_from(b[k]);
  return make_grid(j.at("dimension").get<int>(), Extent{ext[0], ext[1], ext[2], ext[3]}, j.at("n_per_dim").get<int>(),
                   tags);
}

json matrix_to_json(const Matrix& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows * cols)
    throw PreconditionError("matrix entry count does not match rows*cols");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

json to_json(const DiscreteOperator& op) {
  json j{{"rows", op.matrix.rows()},
         {"cols", op.matrix.cols()},
         {"matrix", matrix_to_json(op.matrix)},
         {"norms",
          {{"weights", std::vector<double>(op.norms->weights.data(), op.norms->weights.data() + op.norms->weights.size())},
           {"q", op.norms->q},
           {"d_reference", matrix_to_json(op.norms->d_reference)}}}};
  if (op.grid) j["grid"] = to_json(*op.grid);
  return j;
}

DiscreteOperator operator_from_json(const json& j) {
  Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  if (r != c) throw PreconditionError("operator matrix must be square");
  DiscreteOperator op;
  op.matrix = matrix_from_json(j.at("matrix"), r, c);
  auto n = std::make_shared<NormSpec>();
  const auto& jn = j.at("norms");
  n->weights = vector_from(jn.at("weights"));
  n->q = jn.value("q", 2.0);
  n->d_reference = matrix_from_json(jn.at("d_reference"), r, c);
  if (n->weights.size() != r) throw PreconditionError("norm weights do not match the operator size");
  op.norms = n;
  if (j.contains("grid")) op.grid = std::make_shared<const Grid>(grid_from_json(j.at("grid")));
  return op;
}

json to_json(const ObservationMap& c) {
  return json{{"kind", to_string(c.kind)},
              {"rows", c.matrix.rows()},
              {"cols", c.matrix.cols()},
              {"matrix", matrix_to_json(c.matrix)},
              {"y_weights", std::vector<double>(c.y_weights.data(), c.y_weights.data() + c.y_weights.size())}};
}

ObservationMap observation_from_json(const json& j) {
  ObservationMap c;
  c.kind = kind_from(j.at("kind").get<std::string>());
  c.matrix = matrix_from_json(j.at("matrix"), j.at("rows").get<Index>(), j.at("cols").get<Index>());
  c.y_weights = vector_from(j.at("y_weights"));
  if (c.y_weights.size() != c.matrix.rows()) throw PreconditionError("observation y_weights size mismatch");
  return c;
}

}  // namespace evolab::opalg
