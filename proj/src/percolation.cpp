#include "fractal_lab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/rng.hpp"

namespace fractal_lab {

namespace {

void check_params(int n, int l, double p, int depth, const char* who) {
  const std::string w(who);
  if (n < 1) throw InvalidArgument(w + ": dimension must be >= 1");
  if (l < 2) throw InvalidArgument(w + ": branching l must be >= 2");
  if (!(p > 0.0) || !(p <= 1.0)) throw InvalidArgument(w + ": p must lie in (0, 1]");
  if (depth < 1) throw InvalidArgument(w + ": depth must be >= 1");
  if (static_cast<double>(depth) * std::log2(static_cast<double>(l)) >= 32.0)
    throw CapacityError(w + ": l^depth does not fit 32-bit cell coordinates; lower depth");
}

std::size_t children_per_cell(int n, int l) {
  double c = std::pow(static_cast<double>(l), n);
  if (c > 1e6) throw CapacityError("percolation: l^n children per cell is too many");
  return static_cast<std::size_t>(c);
}

// Retention uniform of a child cell, a pure function of (seed, level, coordinates).
double retention_uniform(std::uint64_t level_key, std::span<const std::uint32_t> child) {
  std::uint64_t h = level_key;
  for (std::uint32_t c : child) h = mix64(h ^ (static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint64_t level_key(std::uint64_t seed, int level) {
  return derive_stream(seed, {stream_tag::kPercolation, static_cast<std::uint64_t>(level)});
}

// Child offset number j (0 <= j < l^n) written into `child` from the parent cell.
void make_child(std::span<const std::uint32_t> parent, int l, std::size_t j, std::span<std::uint32_t> child) {
  for (std::size_t d = parent.size(); d-- > 0;) {
    child[d] = parent[d] * static_cast<std::uint32_t>(l) + static_cast<std::uint32_t>(j % static_cast<std::size_t>(l));
    j /= static_cast<std::size_t>(l);
  }
}

bool survives_from(int n, int l, double p, int depth, std::uint64_t seed, int level,
                   std::span<const std::uint32_t> cell, std::size_t per_cell) {
  if (level == depth) return true;
  const std::uint64_t key = level_key(seed, level + 1);
  std::vector<std::uint32_t> child(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < per_cell; ++j) {
    make_child(cell, l, j, child);
    if (retention_uniform(key, child) < p && survives_from(n, l, p, depth, seed, level + 1, child, per_cell))
      return true;
  }
  return false;
}

// Children come out grouped by parent; rows are re-sorted lexicographically.
void sort_rows(std::vector<std::uint32_t>& rows, std::size_t dn) {
  const std::size_t m = rows.size() / dn;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(rows.begin() + a * dn, rows.begin() + (a + 1) * dn, rows.begin() + b * dn,
                                        rows.begin() + (b + 1) * dn);
  });
  std::vector<std::uint32_t> out(rows.size());
  for (std::size_t i = 0; i < m; ++i) std::copy_n(rows.begin() + order[i] * dn, dn, out.begin() + i * dn);
  rows.swap(out);
}

}  // namespace

CellIndex PercTree::index(int level, std::size_t i) const {
  auto c = cell(level, i);
  CellIndex out{level, std::vector<std::vector<int>>(static_cast<std::size_t>(level), std::vector<int>(c.size()))};
  for (std::size_t d = 0; d < c.size(); ++d) {
    std::uint32_t v = c[d];
    for (int k = level; k-- > 0;) {
      out.digits[static_cast<std::size_t>(k)][d] = static_cast<int>(v % static_cast<std::uint32_t>(branching));
      v /= static_cast<std::uint32_t>(branching);
    }
  }
  return out;
}

PercTree sample_percolation(int n, int l, double p, int depth, std::uint64_t seed) {
  check_params(n, l, p, depth, "sample_percolation");
  const std::size_t per_cell = children_per_cell(n, l);
  const double mean = p * static_cast<double>(per_cell);
  double expected = 1.0, total = 1.0;
  for (int k = 1; k <= depth; ++k) {
    expected *= mean;
    total += expected;
  }
  if (total > static_cast<double>(kMaxPercolationCells))
    throw CapacityError("sample_percolation: expected " + std::to_string(static_cast<long double>(total)) +
                        " cells exceeds the budget of " + std::to_string(kMaxPercolationCells) +
                        "; lower depth, p or l");
  PercTree tree;
  tree.dim = n;
  tree.branching = l;
  tree.retain_prob = p;
  tree.depth = depth;
  tree.seed = seed;
  tree.kept.resize(static_cast<std::size_t>(depth) + 1);
  tree.kept[0].assign(static_cast<std::size_t>(n), 0);
  const auto dn = static_cast<std::size_t>(n);
  std::vector<std::uint32_t> child(dn);
  std::size_t stored = 1;
  for (int level = 1; level <= depth; ++level) {
    const auto& prev = tree.kept[static_cast<std::size_t>(level) - 1];
    auto& next = tree.kept[static_cast<std::size_t>(level)];
    const std::uint64_t key = level_key(seed, level);
    for (std::size_t c = 0; c < prev.size() / dn; ++c) {
      std::span<const std::uint32_t> parent(prev.data() + c * dn, dn);
      for (std::size_t j = 0; j < per_cell; ++j) {
        make_child(parent, l, j, child);
        if (retention_uniform(key, child) < p) next.insert(next.end(), child.begin(), child.end());
      }
    }
    stored += next.size() / dn;
    if (stored > 2 * kMaxPercolationCells)
      throw CapacityError("sample_percolation: realized cell count exceeds twice the budget; lower depth or p");
    sort_rows(next, dn);
  }
  return tree;
}

bool survives(int n, int l, double p, int depth, std::uint64_t seed) {
  check_params(n, l, p, depth, "survives");
  const std::vector<std::uint32_t> root(static_cast<std::size_t>(n), 0);
  return survives_from(n, l, p, depth, seed, 0, root, children_per_cell(n, l));
}

ProbabilityEstimate survival_probability(int n, int l, double p, int depth, std::size_t replicates,
                                         std::uint64_t seed) {
  check_params(n, l, p, depth, "survival_probability");
  if (replicates < 100) throw InvalidArgument("survival_probability: need at least 100 replicates");
  const auto alive = parallel_map<unsigned char>(replicates, [&](std::size_t r) -> unsigned char {
    return survives(n, l, p, depth, derive_stream(seed, {stream_tag::kReplicate, r})) ? 1 : 0;
  });
  ProbabilityEstimate est;
  est.replicates = replicates;
  for (auto a : alive) est.successes += a;
  est.estimate = static_cast<double>(est.successes) / static_cast<double>(replicates);
  est.radius = 3.0 * std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(replicates));
  return est;
}

DimensionCheck dimension_check(const PercTree& tree, std::span<const int> levels) {
  if (!tree.survived()) throw InvalidArgument("dimension_check: tree is extinct at its full depth");
  std::vector<int> use(levels.begin(), levels.end());
  if (use.empty()) {
    const int first = tree.depth >= 3 ? 2 : 1;
    for (int k = first; k <= tree.depth; ++k) use.push_back(k);
  }
  std::sort(use.begin(), use.end());
  if (use.size() < 2) throw InvalidArgument("dimension_check: need at least 2 levels");
  DimensionCheck out;
  for (std::size_t i = 0; i < use.size(); ++i) {
    const int k = use[i];
    if (k < 0 || k > tree.depth) throw InvalidArgument("dimension_check: level outside [0, depth]");
    if (i > 0 && k == use[i - 1]) throw InvalidArgument("dimension_check: repeated level");
    out.fit.scales.push_back(std::pow(static_cast<double>(tree.branching), -k));
    out.fit.counts.push_back(tree.count(k));
    out.fit.used.push_back(true);
  }
  fit_scaling(out.fit);
  out.reference = tree.dim + std::log(tree.retain_prob) / std::log(static_cast<double>(tree.branching));
  return out;
}

namespace {

// Deepest-level cells as sorted packed keys (lexicographic order is key order).
struct CellGrid {
  std::size_t dim;
  std::uint64_t side;
  std::vector<std::uint64_t> keys;

  std::size_t find(std::span<const std::int64_t> c) const {
    std::uint64_t k = 0;
    for (std::int64_t v : c) {
      if (v < 0 || static_cast<std::uint64_t>(v) >= side) return npos;
      k = k * side + static_cast<std::uint64_t>(v);
    }
    auto it = std::lower_bound(keys.begin(), keys.end(), k);
    return (it != keys.end() && *it == k) ? static_cast<std::size_t>(it - keys.begin()) : npos;
  }
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

CellGrid make_grid(const PercTree& tree) {
  const auto dn = static_cast<std::size_t>(tree.dim);
  const double side = std::pow(static_cast<double>(tree.branching), tree.depth);
  if (static_cast<double>(dn) * std::log2(side) >= 63.0)
    throw CapacityError("percolation analysis: l^(depth*n) does not fit a 64-bit cell key");
  CellGrid g{dn, static_cast<std::uint64_t>(side), {}};
  const std::size_t count = tree.count(tree.depth);
  g.keys.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t k = 0;
    for (std::uint32_t v : tree.cell(tree.depth, i)) k = k * g.side + v;
    g.keys[i] = k;
  }
  return g;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t root(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = root(a);
    b = root(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// All offsets with Chebyshev norm exactly r (r >= 1).
void for_shell(std::size_t dim, std::int64_t r, auto&& fn) {
  std::vector<std::int64_t> off(dim, -r);
  while (true) {
    bool on_shell = false;
    for (auto v : off) on_shell |= (v == r || v == -r);
    if (on_shell && !fn(std::span<const std::int64_t>(off))) return;
    std::size_t d = 0;
    while (d < dim && off[d] == r) off[d++] = -r;
    if (d == dim) return;
    ++off[d];
  }
}

double center_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double x = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    s += x * x;
  }
  return std::sqrt(s);
}

// Distance (cell units) from cell i to the nearest accepted cell, searching
// Chebyshev shells until no closer cell can exist or `limit` is reached.
template <class Accept>
double nearest_cell(const PercTree& tree, const CellGrid& grid, std::size_t i, Accept accept, double limit) {
  const int K = tree.depth;
  const auto me = tree.cell(K, i);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> probe(grid.dim);
  const auto max_r = static_cast<std::int64_t>(grid.side);
  for (std::int64_t r = 1; r <= max_r; ++r) {
    if (static_cast<double>(r) >= std::min(best, limit)) break;
    for_shell(grid.dim, r, [&](std::span<const std::int64_t> off) {
      for (std::size_t d = 0; d < grid.dim; ++d) probe[d] = static_cast<std::int64_t>(me[d]) + off[d];
      const std::size_t j = grid.find(probe);
      if (j != CellGrid::npos && accept(j)) best = std::min(best, center_distance(me, tree.cell(K, j)));
      return true;
    });
  }
  return best;
}

constexpr std::size_t kBruteForceCells = 2048;

}  // namespace

std::vector<std::size_t> component_labels(const PercTree& tree, Adjacency adjacency) {
  const CellGrid grid = make_grid(tree);
  const std::size_t count = grid.keys.size();
  UnionFind uf(count);
  const int K = tree.depth;
  std::vector<std::int64_t> probe(grid.dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto me = tree.cell(K, i);
    if (adjacency == Adjacency::Face) {
      for (std::size_t d = 0; d < grid.dim; ++d) {
        for (std::size_t e = 0; e < grid.dim; ++e) probe[e] = me[e];
        probe[d] += 1;  // the -1 neighbour is handled from the other side
        const std::size_t j = grid.find(probe);
        if (j != CellGrid::npos) uf.unite(i, j);
      }
    } else {
      for_shell(grid.dim, 1, [&](std::span<const std::int64_t> off) {
        for (std::size_t e = 0; e < grid.dim; ++e) probe[e] = static_cast<std::int64_t>(me[e]) + off[e];
        const std::size_t j = grid.find(probe);
        if (j != CellGrid::npos) uf.unite(i, j);
        return true;
      });
    }
  }
  std::vector<std::size_t> label(count), root_label(count, CellGrid::npos);
  std::size_t next = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t r = uf.root(i);
    if (root_label[r] == CellGrid::npos) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

DisconnectionStats disconnection_stats(const PercTree& tree, Adjacency adjacency) {
  if (!tree.survived()) throw InvalidArgument("disconnection_stats: tree is extinct at its full depth");
  const int K = tree.depth;
  const CellGrid grid = make_grid(tree);
  const std::size_t count = grid.keys.size();
  const auto label = component_labels(tree, adjacency);
  DisconnectionStats st;
  st.component_count = count == 0 ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::size_t> sizes(st.component_count, 0);
  for (auto c : label) ++sizes[c];
  st.largest_component_cells = *std::max_element(sizes.begin(), sizes.end());

  const bool brute = count <= kBruteForceCells;
  // Nearest other kept cell.
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  std::vector<double> gap(st.component_count, std::numeric_limits<double>::infinity());
  if (brute) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j) {
        const double d = center_distance(tree.cell(K, i), tree.cell(K, j));
        nearest[i] = std::min(nearest[i], d);
        nearest[j] = std::min(nearest[j], d);
        if (label[i] != label[j]) {
          gap[label[i]] = std::min(gap[label[i]], d);
          gap[label[j]] = std::min(gap[label[j]], d);
        }
      }
  } else {
    const auto n64 = static_cast<std::int64_t>(count);
    const auto nearest_any = [&](std::size_t i) {
      return nearest_cell(tree, grid, i, [](std::size_t) { return true; }, std::numeric_limits<double>::infinity());
    };
    const auto near = parallel_map<double>(count, nearest_any);
    nearest = near;
    if (st.component_count > 1) {
      for (std::int64_t s = 0; s < n64; ++s) {
        const auto i = static_cast<std::size_t>(s);
        const std::size_t c = label[i];
        gap[c] = std::min(gap[c], nearest_cell(tree, grid, i, [&](std::size_t j) { return label[j] != c; }, gap[c]));
      }
    }
  }
  st.perfectness_min_gap = std::numeric_limits<double>::infinity();
  for (double d : nearest) st.perfectness_min_gap = std::min(st.perfectness_min_gap, 1.0 / d);
  if (count == 1) st.perfectness_min_gap = 0.0;

  if (st.component_count > 1) {
    std::vector<std::vector<std::uint32_t>> lo(st.component_count, std::vector<std::uint32_t>(grid.dim, UINT32_MAX));
    std::vector<std::vector<std::uint32_t>> hi(st.component_count, std::vector<std::uint32_t>(grid.dim, 0));
    for (std::size_t i = 0; i < count; ++i) {
      const auto me = tree.cell(K, i);
      for (std::size_t d = 0; d < grid.dim; ++d) {
        lo[label[i]][d] = std::min(lo[label[i]][d], me[d]);
        hi[label[i]][d] = std::max(hi[label[i]][d], me[d]);
      }
    }
    for (std::size_t c = 0; c < st.component_count; ++c) {
      double diag = 0.0;
      for (std::size_t d = 0; d < grid.dim; ++d) {
        const double ext = static_cast<double>(hi[c][d] - lo[c][d]) + 1.0;
        diag += ext * ext;
      }
      st.disconnectedness_modulus = std::max(st.disconnectedness_modulus, std::sqrt(diag) / gap[c]);
    }
  }
  return st;
}

std::string percolation_csv(const PercTree& tree) {
  if (tree.branching > 36) throw InvalidArgument("percolation_csv: branching above 36 has no single-character digits");
  static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out = "level,digits\n";
  for (int level = 0; level <= tree.depth; ++level)
    for (std::size_t i = 0; i < tree.count(level); ++i) {
      const CellIndex idx = tree.index(level, i);
      out += std::to_string(level);
      out += ',';
      for (int k = 0; k < level; ++k) {
        if (k > 0) out += '.';
        for (int v : idx.digits[static_cast<std::size_t>(k)]) out += kDigits[v];
      }
      out += '\n';
    }
  return out;
}

GrayImage percolation_raster(const PercTree& tree) {
  if (tree.dim > 3) throw InvalidArgument("percolation_raster: only n <= 3 can be rasterized");
  const double side_d = std::pow(static_cast<double>(tree.branching), tree.depth);
  const double slices = tree.dim == 3 ? side_d : 1.0;
  const double rows = tree.dim == 1 ? 1.0 : side_d;
  if (side_d * rows * slices > 2e8) throw CapacityError("percolation_raster: image too large; lower depth");
  const auto side = static_cast<std::size_t>(side_d);
  GrayImage img;
  img.width = side;
  img.height = static_cast<std::size_t>(rows * slices);
  img.pixels.assign(img.width * img.height, 0);
  for (std::size_t i = 0; i < tree.count(tree.depth); ++i) {
    const auto c = tree.cell(tree.depth, i);
    std::size_t x = c[0], y = 0;
    if (tree.dim >= 2) y = side - 1 - c[1];  // row 0 is the top of the cube
    if (tree.dim == 3) y += static_cast<std::size_t>(c[2]) * side;
    img.pixels[y * img.width + x] = 255;
  }
  return img;
}

}  // namespace fractal_lab
