#include "subdiff/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subdiff {

Piece piece_from_subgraph(const Subgraph& s) {
  Piece p;
  p.graph = s.graph;
  p.rows.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p.rows.push_back(context_row(s.context, static_cast<Eigen::Index>(i)));
  return p;
}

namespace {

double max_abs_diff(const ContextRow& a, const ContextRow& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::string format_row(const ContextRow& r) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (std::size_t i = 0; i < r.size(); ++i) out << (i ? ", " : "") << r[i];
  out << ')';
  return out.str();
}

}  // namespace

Coalesced coalesce(const std::vector<Piece>& pieces, double epsilon) {
  // First pass: assign each row a canonical representative.
  std::vector<ContextRow> canon;
  std::map<ContextRow, std::size_t> exact;
  std::vector<std::vector<std::size_t>> local_to_canon(pieces.size());
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const auto& piece = pieces[p];
    if (piece.rows.size() != piece.graph.num_nodes()) {
      throw std::invalid_argument("coalesce: piece " + std::to_string(p) + " has row/node count mismatch");
    }
    for (const auto& row : piece.rows) {
      auto it = exact.find(row);
      std::size_t id = 0;
      if (it != exact.end()) {
        id = it->second;
      } else if (epsilon > 0.0) {
        std::vector<std::size_t> hits;
        for (std::size_t c = 0; c < canon.size(); ++c) {
          if (max_abs_diff(canon[c], row) <= epsilon) hits.push_back(c);
        }
        if (hits.size() > 1) {
          throw std::invalid_argument("coalesce: row " + format_row(row) + " matches both " +
                                      format_row(canon[hits[0]]) + " and " + format_row(canon[hits[1]]));
        }
        if (hits.empty()) {
          id = canon.size();
          canon.push_back(row);
        } else {
          id = hits[0];
        }
        exact.emplace(row, id);
      } else {
        id = canon.size();
        canon.push_back(row);
        exact.emplace(row, id);
      }
      local_to_canon[p].push_back(id);
    }
    auto ids = local_to_canon[p];
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw std::invalid_argument("coalesce: piece " + std::to_string(p) + " has two nodes with the same context row");
    }
  }

  // Order output nodes by canonical row.
  std::vector<std::size_t> order(canon.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return canon[a] < canon[b]; });
  std::vector<NodeId> final_id(canon.size());
  Coalesced out;
  out.rows.reserve(canon.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    final_id[order[pos]] = static_cast<NodeId>(pos);
    out.rows.push_back(canon[order[pos]]);
  }

  EdgeList edges;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    for (const auto& e : pieces[p].graph.edges()) {
      edges.emplace_back(final_id[local_to_canon[p][e.u]], final_id[local_to_canon[p][e.v]]);
    }
  }
  out.graph = Graph(canon.size(), std::move(edges));
  return out;
}

StitchResult generate_large(const DiffusionModel& model, const StitchOptions& options, const PieceObserver& observe) {
  const auto& hist = model.histograms;
  if (hist.global.empty() || hist.size.empty()) throw std::invalid_argument("stitch: empty histograms");
  std::vector<const ContextRow*> rows;
  std::vector<double> counts;
  std::vector<NodeId> sources;
  for (const auto& [row, entry] : hist.global) {
    rows.push_back(&row);
    counts.push_back(static_cast<double>(entry.count));
    sources.push_back(entry.node);
  }
  std::vector<std::size_t> sizes;
  std::vector<double> size_weights;
  for (const auto& [n, count] : hist.size) {
    sizes.push_back(n);
    size_weights.push_back(static_cast<double>(count));
  }

  const std::size_t guard = options.max_iterations > 0 ? options.max_iterations : 50 * rows.size();
  std::vector<char> covered(rows.size(), 0);
  std::size_t uncovered = rows.size();
  std::vector<Piece> pieces;
  std::size_t iter = 0;
  while (uncovered > 0) {
    if (iter >= guard) {
      throw std::runtime_error("stitch: " + std::to_string(uncovered) + " context rows still uncovered after " +
                               std::to_string(iter) + " iterations");
    }
    Rng rng = make_rng(options.seed, iter);
    std::discrete_distribution<std::size_t> size_dist(size_weights.begin(), size_weights.end());
    std::size_t n = std::clamp<std::size_t>(sizes[size_dist(rng)], 2, rows.size());

    std::vector<double> w(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) w[i] = counts[i] * (covered[i] ? 1.0 : options.uncovered_weight);
    std::vector<std::size_t> chosen;
    for (std::size_t k = 0; k < n; ++k) {
      double total = 0.0;
      for (double x : w) total += x;
      double u = uniform01(rng) * total;
      std::size_t pick = rows.size() - 1;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (w[i] <= 0.0) continue;
        if (u < w[i]) {
          pick = i;
          break;
        }
        u -= w[i];
        pick = i;
      }
      chosen.push_back(pick);
      w[pick] = 0.0;
    }
    std::sort(chosen.begin(), chosen.end());

    const auto d = static_cast<Eigen::Index>(rows[0]->size());
    Eigen::MatrixXd C(static_cast<Eigen::Index>(n), d);
    Piece piece;
    for (std::size_t i = 0; i < n; ++i) {
      const ContextRow& r = *rows[chosen[i]];
      for (Eigen::Index j = 0; j < d; ++j) C(static_cast<Eigen::Index>(i), j) = r[static_cast<std::size_t>(j)];
      piece.rows.push_back(r);
      if (!covered[chosen[i]]) {
        covered[chosen[i]] = 1;
        --uncovered;
      }
    }
    piece.graph = state_graph(reverse_sample(model, n, C, rng), model.config.net.num_classes);
    if (observe) observe(iter, piece);
    pieces.push_back(std::move(piece));
    ++iter;
  }

  Coalesced merged = coalesce(pieces, options.epsilon_match);
  StitchResult out;
  out.graph = std::move(merged.graph);
  out.rows = std::move(merged.rows);
  out.iterations = iter;
  // Canonical rows come from the histogram itself, so each maps back exactly.
  for (const auto& r : out.rows) {
    auto it = hist.global.find(r);
    out.source_nodes.push_back(it != hist.global.end() ? it->second.node : NodeId{0});
  }
  return out;
}

}  // namespace subdiff
