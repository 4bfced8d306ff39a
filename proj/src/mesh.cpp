#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "minlag/mesh.hpp"

namespace mlg {

const char* to_string(NodeTag tag) { return tag == NodeTag::Interior ? "interior" : "boundary"; }

MeshParams MeshParams::from_h(double h, double c_theta, double c_r, double delta_factor, double hB_exponent) {
  if (!(h > 0) || !(c_theta > 0) || !(c_r > 0)) throw MeshError("MeshParams: h, c_theta and c_r must be positive");
  MeshParams p;
  p.h = h;
  p.h_B = std::pow(h, hB_exponent);
  p.delta = delta_factor * h;
  const double quarter_steps = std::ceil(std::numbers::pi / (2 * c_theta * std::sqrt(h)));
  p.dtheta = std::numbers::pi / (2 * quarter_steps);
  p.r = c_r * std::sqrt(h);
  p.validate();
  return p;
}

void MeshParams::validate() const {
  if (!(h > 0)) throw MeshError("MeshParams: h must be positive");
  if (!(h_B > 0) || h_B > h) throw MeshError("MeshParams: h_B must lie in (0, h]");
  if (delta < h / 4 - 1e-15 || delta > h + 1e-15) throw MeshError("MeshParams: delta must lie in [h/4, h]");
  if (!(dtheta > 0) || dtheta > std::numbers::pi / 2) throw MeshError("MeshParams: dtheta must lie in (0, pi/2]");
  if (!(r >= h)) throw MeshError("MeshParams: search radius r must be at least h");
}

QuadMesh QuadMesh::from_nodes(std::vector<Point2> nodes, std::vector<NodeTag> tags, const MeshParams& params) {
  if (nodes.size() != tags.size()) throw MeshError("from_nodes: node and tag counts differ");
  if (nodes.empty()) throw MeshError("from_nodes: empty node set");
  for (const auto& p : nodes)
    if (!p.allFinite()) throw MeshError("from_nodes: non-finite node");
  QuadMesh m;
  m.nodes_ = std::move(nodes);
  m.tags_ = std::move(tags);
  m.params_ = params;
  m.index_ = SpatialIndex(m.nodes_, std::max(params.r / 4, 1e-12));
  Point2 lo = m.nodes_.front();
  for (const auto& p : m.nodes_) lo = lo.cwiseMin(p);
  m.lattice_origin = lo;
  return m;
}

std::size_t QuadMesh::interior_count() const {
  return static_cast<std::size_t>(std::count(tags_.begin(), tags_.end(), NodeTag::Interior));
}

std::size_t QuadMesh::boundary_count() const { return size() - interior_count(); }

NodeId QuadMesh::nearest_interior(const Point2& p) const {
  return index_.nearest(p, [this](NodeId id) { return is_interior(id); });
}

QuadMesh build_mesh(const ConvexBodyd& domain, const MeshParams& params) {
  params.validate();
  if (domain.kind() == ShapeKind::Segment) throw MeshError("build_mesh: domain must have interior");
  const auto [lo, hi] = domain.bounding_box();
  const double extent = (hi - lo).maxCoeff();
  int levels = 0;
  double side = params.h;
  while (side < extent * (1 - 1e-12)) {
    side *= 2;
    ++levels;
  }
  const Point2 origin = (lo + hi) / 2 - Point2(side / 2, side / 2);

  QuadTree tree(origin, side);
  tree.refine(
      [&domain](const QuadTree::Cell& c) {
        const Point2 center = c.origin + Point2(c.size / 2, c.size / 2);
        return domain.signed_distance(center) <= c.size * std::numbers::sqrt2 / 2;
      },
      levels);
  tree.balance();

  // Interior nodes: finest-level lattice corners at distance >= delta from the boundary.
  const long n = (1L << levels) + 1;
  std::vector<long> keys;
  for (const auto leaf : tree.leaves()) {
    const auto& c = tree.cell(leaf);
    if (c.level != levels) continue;
    const long i = std::lround((c.origin.x() - origin.x()) / params.h);
    const long j = std::lround((c.origin.y() - origin.y()) / params.h);
    for (long dj = 0; dj <= 1; ++dj)
      for (long di = 0; di <= 1; ++di) keys.push_back((j + dj) * n + (i + di));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::vector<Point2> nodes;
  std::vector<NodeTag> tags;
  for (const long key : keys) {
    const Point2 p = origin + params.h * Point2(static_cast<double>(key % n), static_cast<double>(key / n));
    if (domain.signed_distance(p) <= -params.delta) {
      nodes.push_back(p);
      tags.push_back(NodeTag::Interior);
    }
  }
  if (nodes.size() < 9) throw MeshError("build_mesh: fewer than 9 interior nodes; domain too small for h");
  for (const auto& p : domain.boundary_points(params.h_B)) {
    nodes.push_back(p);
    tags.push_back(NodeTag::Boundary);
  }

  QuadMesh mesh = QuadMesh::from_nodes(std::move(nodes), std::move(tags), params);
  mesh.lattice_origin = origin;
  mesh.tree_levels = levels;
  mesh.tree_leaves = tree.leaves().size();
  mesh.tree_max_level_jump = tree.max_level_jump();
  return mesh;
}

std::vector<NodeId> neighbors_in_ball(const QuadMesh& mesh, NodeId node, double radius) {
  auto ids = mesh.index().query(mesh.node(node), radius);
  ids.erase(std::remove(ids.begin(), ids.end(), node), ids.end());
  return ids;
}

RealizedMetrics realized_metrics(const QuadMesh& mesh, const ConvexBodyd& domain) {
  const double h = mesh.params().h;
  const SpatialIndex fine(mesh.nodes(), h);
  auto nearest_distance = [&](const Point2& p) { return (mesh.node(fine.nearest(p)) - p).norm(); };

  RealizedMetrics out;
  const auto [lo, hi] = domain.bounding_box();
  const double step = h / 2;
  const long i0 = static_cast<long>(std::floor((lo.x() - mesh.lattice_origin.x()) / step));
  const long i1 = static_cast<long>(std::ceil((hi.x() - mesh.lattice_origin.x()) / step));
  const long j0 = static_cast<long>(std::floor((lo.y() - mesh.lattice_origin.y()) / step));
  const long j1 = static_cast<long>(std::ceil((hi.y() - mesh.lattice_origin.y()) / step));
  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Point2 p = mesh.lattice_origin + step * Point2(static_cast<double>(i), static_cast<double>(j));
      if (domain.contains(p)) out.h = std::max(out.h, nearest_distance(p));
    }
  }
  const double spacing = std::max(mesh.params().h_B / 2, domain.perimeter() / 2e5);
  for (const auto& p : domain.boundary_points(spacing)) {
    const double d = nearest_distance(p);
    out.h = std::max(out.h, d);
    out.h_B = std::max(out.h_B, d);
  }

  out.delta = std::numeric_limits<double>::infinity();
  for (NodeId id = 0; id < static_cast<NodeId>(mesh.size()); ++id) {
    if (mesh.is_interior(id)) continue;
    const NodeId nb = fine.nearest(mesh.node(id), [&mesh](NodeId k) { return mesh.is_interior(k); });
    if (nb >= 0) out.delta = std::min(out.delta, (mesh.node(nb) - mesh.node(id)).norm());
  }
  return out;
}

void write_mesh_csv(const QuadMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out << "# schema: minlag-mesh v1\n";
  out << "node_id,x,y,tag\n";
  out.precision(17);
  for (NodeId id = 0; id < static_cast<NodeId>(mesh.size()); ++id)
    out << id << ',' << mesh.node(id).x() << ',' << mesh.node(id).y() << ',' << to_string(mesh.tag(id)) << '\n';
}

QuadMesh read_mesh_csv(const std::filesystem::path& path, const MeshParams& params) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot read " + path.string());
  std::vector<Point2> nodes;
  std::vector<NodeTag> tags;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("node_id,x,y,tag", 0) != 0) throw MeshError("mesh csv: unexpected header");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string id, x, y, tag;
    if (!std::getline(ss, id, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y, ',') ||
        !std::getline(ss, tag, ','))
      throw MeshError("mesh csv: malformed row: " + line);
    if (std::stol(id) != static_cast<long>(nodes.size())) throw MeshError("mesh csv: node ids must be 0..N-1 in order");
    nodes.emplace_back(std::stod(x), std::stod(y));
    if (tag == "interior") {
      tags.push_back(NodeTag::Interior);
    } else if (tag == "boundary") {
      tags.push_back(NodeTag::Boundary);
    } else {
      throw MeshError("mesh csv: unknown tag " + tag);
    }
  }
  return QuadMesh::from_nodes(std::move(nodes), std::move(tags), params);
}

}  // namespace mlg
