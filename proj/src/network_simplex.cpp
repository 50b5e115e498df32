#include "lgp/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgp/error.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Arcs 0 .. n*m-1 are source i -> sink j (index i*m + j). Arc n*m + i is the
// artificial source i -> root, arc n*m + n + j the artificial root -> sink j.
class Simplex {
 public:
  Simplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
      : n_(supply.size()), m_(demand.size()), root_(n_ + m_), cost_(cost) {
    const std::size_t arcs = n_ * m_ + n_ + m_;
    double max_cost = 0.0;
    for (double c : cost) max_cost = std::max(max_cost, std::fabs(c));
    const double nodes = static_cast<double>(n_ + m_ + 1);
    big_ = (max_cost + 1.0) * nodes;
    tol_ = 1e-13 * big_;
    flow_.assign(arcs, 0.0);
    in_tree_.assign(arcs, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      flow_[n_ * m_ + i] = supply[i];
      add_tree(n_ * m_ + i);
    }
    for (std::size_t j = 0; j < m_; ++j) {
      flow_[n_ * m_ + n_ + j] = demand[j];
      add_tree(n_ * m_ + n_ + j);
    }
    block_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(arcs)))));
    parent_.resize(root_ + 1);
    pred_.resize(root_ + 1);
    up_.resize(root_ + 1);
    depth_.resize(root_ + 1);
    pi_.resize(root_ + 1);
    rebuild();
  }

  std::size_t run() {
    std::size_t pivots = 0;
    for (std::size_t e = price(); e != kNone; e = price()) {
      pivot(e);
      ++pivots;
    }
    return pivots;
  }

  TransportationSolution result(double flow_floor) const {
    TransportationSolution out;
    for (std::size_t e : tree_) {
      if (e < n_ * m_ && flow_[e] > flow_floor) out.flows.push_back({e / m_, e % m_, flow_[e]});
    }
    std::sort(out.flows.begin(), out.flows.end(), [](const BasicFlow& a, const BasicFlow& b) {
      return a.source != b.source ? a.source < b.source : a.sink < b.sink;
    });
    out.source_potential.assign(pi_.begin(), pi_.begin() + static_cast<std::ptrdiff_t>(n_));
    out.sink_potential.assign(pi_.begin() + static_cast<std::ptrdiff_t>(n_),
                              pi_.begin() + static_cast<std::ptrdiff_t>(n_ + m_));
    return out;
  }

 private:
  std::size_t tail(std::size_t e) const {
    if (e < n_ * m_) return e / m_;
    if (e < n_ * m_ + n_) return e - n_ * m_;
    return root_;
  }
  std::size_t head(std::size_t e) const {
    if (e < n_ * m_) return n_ + e % m_;
    if (e < n_ * m_ + n_) return root_;
    return n_ + (e - n_ * m_ - n_);
  }
  double cost(std::size_t e) const { return e < n_ * m_ ? cost_[e] : big_; }
  double reduced(std::size_t e) const { return cost(e) - pi_[tail(e)] + pi_[head(e)]; }

  void add_tree(std::size_t e) {
    in_tree_[e] = 1;
    tree_.push_back(e);
  }

  // Block pricing: the most negative reduced cost within the first block
  // (scanning cyclically) that contains a candidate.
  std::size_t price() {
    const std::size_t arcs = flow_.size();
    const std::size_t grid = n_ * m_;
    double best_rc = -tol_;
    std::size_t best = kNone;
    std::size_t seen = 0;
    std::size_t e = next_;
    // Source/sink indices of e, stepped alongside it to keep divisions out
    // of the scan.
    std::size_t i = e < grid ? e / m_ : 0, j = e < grid ? e % m_ : 0;
    for (std::size_t k = 0; k < arcs; ++k) {
      if (!in_tree_[e]) {
        const double r = e < grid ? cost_[e] - pi_[i] + pi_[n_ + j] : reduced(e);
        if (r < best_rc) {
          best_rc = r;
          best = e;
        }
      }
      if (++e == arcs) {
        e = 0;
        i = 0;
        j = 0;
      } else if (e < grid && ++j == m_) {
        j = 0;
        ++i;
      }
      if (++seen == block_) {
        seen = 0;
        if (best != kNone) {
          next_ = e;
          return best;
        }
      }
    }
    return best;
  }

  void pivot(std::size_t entering) {
    const std::size_t first = tail(entering);
    const std::size_t second = head(entering);
    std::size_t a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) a = parent_[a];
      else b = parent_[b];
    }
    const std::size_t join = a;

    // Strongly feasible leaving rule: last blocking arc in cycle order.
    double delta = kInf;
    std::size_t out_node = kNone;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      const double d = up_[w] ? flow_[pred_[w]] : kInf;
      if (d < delta) {
        delta = d;
        out_node = w;
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      const double d = up_[w] ? kInf : flow_[pred_[w]];
      if (d <= delta) {
        delta = d;
        out_node = w;
      }
    }
    if (out_node == kNone) throw Error(ErrorCode::internal, "transportation problem is unbounded");

    flow_[entering] += delta;
    for (std::size_t w = first; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? -delta : delta;
    for (std::size_t w = second; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? delta : -delta;
    if (delta > 0.0) {
      // Exact zero on the leaving arc; rounding may leave a trace.
      flow_[pred_[out_node]] = 0.0;
    }

    const std::size_t leaving = pred_[out_node];
    in_tree_[leaving] = 0;
    in_tree_[entering] = 1;
    *std::find(tree_.begin(), tree_.end(), leaving) = entering;
    rebuild();
  }

  // Parent pointers, depths and potentials (pi_tail = pi_head + c on tree
  // arcs, pi_root = 0) by breadth-first search from the root.
  void rebuild() {
    const std::size_t nodes = root_ + 1;
    start_.assign(nodes + 1, 0);
    for (std::size_t e : tree_) {
      ++start_[tail(e) + 1];
      ++start_[head(e) + 1];
    }
    for (std::size_t v = 0; v < nodes; ++v) start_[v + 1] += start_[v];
    adj_.resize(2 * tree_.size());
    fill_ = start_;
    for (std::size_t e : tree_) {
      adj_[fill_[tail(e)]++] = e;
      adj_[fill_[head(e)]++] = e;
    }
    queue_.assign(1, root_);
    parent_[root_] = kNone;
    pred_[root_] = kNone;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t q = 0; q < queue_.size(); ++q) {
      const std::size_t x = queue_[q];
      for (std::size_t k = start_[x]; k < start_[x + 1]; ++k) {
        const std::size_t e = adj_[k];
        if (e == pred_[x]) continue;
        const bool up = head(e) == x;  // the child is the tail: arc child -> x
        const std::size_t y = up ? tail(e) : head(e);
        parent_[y] = x;
        pred_[y] = e;
        up_[y] = up;
        depth_[y] = depth_[x] + 1;
        pi_[y] = up ? pi_[x] + cost(e) : pi_[x] - cost(e);
        queue_.push_back(y);
      }
    }
    if (queue_.size() != nodes) throw Error(ErrorCode::internal, "spanning tree lost connectivity");
  }

  std::size_t n_, m_, root_;
  std::span<const double> cost_;
  double big_ = 0.0;
  double tol_ = 0.0;
  std::size_t block_ = 16;
  std::size_t next_ = 0;
  std::vector<double> flow_;
  std::vector<char> in_tree_;
  std::vector<std::size_t> tree_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<char> up_;
  std::vector<double> pi_;
  std::vector<std::size_t> start_, fill_, adj_, queue_;
};

}  // namespace

TransportationSolution solve_transportation(std::span<const double> supply, std::span<const double> demand,
                                            std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size()) {
    throw Error(ErrorCode::invalid_input, "cost matrix has the wrong size");
  }
  double max_mass = 0.0;
  for (double a : supply) {
    if (!(a > 0.0)) throw Error(ErrorCode::invalid_input, "supplies must be positive");
    max_mass = std::max(max_mass, a);
  }
  for (double b : demand) {
    if (!(b > 0.0)) throw Error(ErrorCode::invalid_input, "demands must be positive");
    max_mass = std::max(max_mass, b);
  }
  for (double c : cost) {
    if (!std::isfinite(c)) throw Error(ErrorCode::invalid_input, "costs must be finite");
  }
  if (supply.empty() || demand.empty()) return {};
  Simplex simplex(supply, demand, cost);
  const std::size_t pivots = simplex.run();
  TransportationSolution out = simplex.result(1e-11 * max_mass);
  out.pivots = pivots;
  return out;
}

}  // namespace lgp
