#pragma once

// Interaction-network layer: builds monthly reply graphs from threaded posts
// and computes the structural indicators — normalized degree and betweenness
// centrality, group centralization, rotating leadership, activity, newcomer
// counts and response times.

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "core.hpp"
#include "ingest.hpp"

namespace forumcast::network {

using ingest::ForumPost;

// ---------------------------------------------------------------------------
// Interaction graph
// ---------------------------------------------------------------------------
//
// Nodes are authors active in the window; one arc per reply posted inside the
// window, pointing from the reply's author to the author of the thread's root
// post (the interaction partner). Self-replies contribute the node but no
// arc. Replies whose thread has no known root are skipped and counted in the
// diagnostics.

struct Arc {
  std::uint32_t source = 0;  // replier
  std::uint32_t target = 0;  // root author
  std::int64_t timestamp = 0;
};

struct GraphDiagnostics {
  std::size_t missing_root_replies = 0;
  std::size_t self_replies = 0;
};

class InteractionGraph {
 public:
  std::uint32_t add_node(const std::string& user) {
    auto [it, inserted] = index_.emplace(user, nodes_.size());
    if (inserted) nodes_.push_back(user);
    return static_cast<std::uint32_t>(it->second);
  }

  void add_arc(const std::string& source, const std::string& target,
               std::int64_t ts) {
    arcs_.push_back(Arc{add_node(source), add_node(target), ts});
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  const std::string& node_id(std::uint32_t i) const {
    return nodes_[static_cast<std::size_t>(i)];
  }

  std::optional<std::uint32_t> find_node(const std::string& user) const {
    auto it = index_.find(user);
    if (it == index_.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it->second);
  }

  // Undirected simple projection: per-node sorted sets of distinct
  // neighbours, self-loops excluded.
  std::vector<std::set<std::uint32_t>> simple_adjacency() const {
    std::vector<std::set<std::uint32_t>> adj(nodes_.size());
    for (const auto& a : arcs_) {
      if (a.source == a.target) continue;
      adj[a.source].insert(a.target);
      adj[a.target].insert(a.source);
    }
    return adj;
  }

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Arc> arcs_;
};

// thread_id -> author of the thread's root post.
using RootIndex = std::unordered_map<std::string, std::string>;

inline RootIndex build_root_index(const std::vector<ForumPost>& posts) {
  RootIndex roots;
  for (const auto& p : posts) {
    if (p.is_root) roots.emplace(p.thread_id, p.author_id);
  }
  return roots;
}

// Builds the reply graph over posts whose timestamps fall in `window`.
// Thread roots are looked up in `roots` when given (typically built over the
// whole corpus, so a reply early in a month finds a root posted in an earlier
// month); otherwise a root index is built from `posts` itself.
inline InteractionGraph build_graph(const std::vector<ForumPost>& posts,
                                    const TimeWindow& window,
                                    GraphDiagnostics* diag = nullptr,
                                    const RootIndex* roots = nullptr) {
  RootIndex local_roots;
  if (!roots) {
    local_roots = build_root_index(posts);
    roots = &local_roots;
  }
  InteractionGraph g;
  GraphDiagnostics local;
  for (const auto& p : posts) {
    if (!window.contains(p.timestamp)) continue;
    g.add_node(p.author_id);
    if (p.is_root) continue;
    auto it = roots->find(p.thread_id);
    if (it == roots->end()) {
      ++local.missing_root_replies;
      continue;
    }
    const std::string& root_author = it->second;
    if (root_author == p.author_id) {
      ++local.self_replies;
      continue;
    }
    g.add_arc(p.author_id, root_author, p.timestamp);
  }
  if (diag) *diag = local;
  return g;
}

// ---------------------------------------------------------------------------
// Centrality
// ---------------------------------------------------------------------------

enum class CentralityKind { degree, betweenness };

// Scores aligned with the graph's node order.
struct CentralityVector {
  CentralityKind kind = CentralityKind::degree;
  std::vector<double> scores;
};

// Normalized degree centrality: distinct neighbours / (N-1); all zeros when
// the graph has fewer than two nodes.
inline CentralityVector degree_centrality(const InteractionGraph& g) {
  CentralityVector out;
  out.kind = CentralityKind::degree;
  const std::size_t n = g.node_count();
  out.scores.assign(n, 0.0);
  if (n < 2) return out;
  const auto adj = g.simple_adjacency();
  for (std::size_t v = 0; v < n; ++v) {
    out.scores[v] =
        static_cast<double>(adj[v].size()) / static_cast<double>(n - 1);
  }
  return out;
}

// Normalized betweenness centrality via Brandes' accumulation on the
// undirected simple projection, scaled by (N-1)(N-2)/2. Zeros when N < 3.
inline CentralityVector betweenness_centrality(const InteractionGraph& g) {
  CentralityVector out;
  out.kind = CentralityKind::betweenness;
  const std::size_t n = g.node_count();
  out.scores.assign(n, 0.0);
  if (n < 3) return out;
  const auto adjset = g.simple_adjacency();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v) {
    adj[v].assign(adjset[v].begin(), adjset[v].end());
  }

  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<std::vector<std::uint32_t>> pred(n);
  std::vector<std::uint32_t> order;
  order.reserve(n);

  for (std::uint32_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : pred) p.clear();
    order.clear();

    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::uint32_t> queue{s};
    while (!queue.empty()) {
      const std::uint32_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::uint32_t w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::uint32_t w = *it;
      for (std::uint32_t v : pred[w]) {
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) out.scores[w] += delta[w];
    }
  }

  // Each unordered pair was accumulated from both endpoints.
  const double denom = static_cast<double>(n - 1) *
                       static_cast<double>(n - 2);  // == 2 * (n-1)(n-2)/2
  for (auto& x : out.scores) x /= denom;
  return out;
}

// ---------------------------------------------------------------------------
// Group centralization
// ---------------------------------------------------------------------------
//
// Sum of gaps between the maximum centrality and each node's centrality,
// divided by the theoretical maximum of that sum, which a star attains. On
// normalized centralities the divisor is (N-2) for degree — equivalent to the
// classical (N-1)(N-2) on raw degree counts — and (N-1) for betweenness.
// Graphs with fewer than three nodes have no defined centralization.

inline std::optional<double> group_centralization(const CentralityVector& c) {
  const std::size_t n = c.scores.size();
  if (n < 3) return std::nullopt;
  const double mx = *std::max_element(c.scores.begin(), c.scores.end());
  double acc = 0.0;
  for (double v : c.scores) acc += mx - v;
  const double denom = c.kind == CentralityKind::degree
                           ? static_cast<double>(n - 2)
                           : static_cast<double>(n - 1);
  return acc / denom;
}

// ---------------------------------------------------------------------------
// Rotating leadership
// ---------------------------------------------------------------------------
//
// The month is cut into consecutive sub-window snapshots; each frequent
// contributor (present in at least `min_presence` snapshots) gets a
// betweenness trajectory across snapshots, with zeros where absent. The
// indicator is the total number of direction changes (local extrema) summed
// over contributors after collapsing flat stretches. Months yielding fewer
// than three snapshots cannot oscillate; they score zero and set the
// `too_few_snapshots` flag when provided.

struct RotatingLeadershipConfig {
  int sub_window_days = 7;
  int step_days = 1;
  int min_presence = 3;
};

namespace detail {

inline int count_direction_changes(const std::vector<double>& traj) {
  // Collapse consecutive duplicates, then count interior extrema.
  std::vector<double> v;
  for (double x : traj) {
    if (v.empty() || x != v.back()) v.push_back(x);
  }
  int changes = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const bool up = v[i] > v[i - 1];
    const bool down = v[i] > v[i + 1];
    if (up == down) ++changes;  // peak (up,up) or trough (down,down)
  }
  return changes;
}

}  // namespace detail

inline double rotating_leadership(const std::vector<ForumPost>& posts,
                                  const TimeWindow& month,
                                  const RotatingLeadershipConfig& cfg = {},
                                  bool* too_few_snapshots = nullptr,
                                  const RootIndex* roots = nullptr) {
  if (cfg.sub_window_days < 1 || cfg.step_days < 1) {
    throw ValidationError("rotating leadership windows must be >= 1 day");
  }
  RootIndex local_roots;
  if (!roots) {
    local_roots = build_root_index(posts);
    roots = &local_roots;
  }
  const std::int64_t sub = static_cast<std::int64_t>(cfg.sub_window_days) * 86400;
  const std::int64_t step = static_cast<std::int64_t>(cfg.step_days) * 86400;

  std::vector<TimeWindow> snaps;
  for (std::int64_t b = month.begin; b + sub <= month.end; b += step) {
    snaps.push_back(TimeWindow{b, b + sub});
  }
  if (snaps.size() < 3) {
    if (too_few_snapshots) *too_few_snapshots = true;
    return 0.0;
  }
  if (too_few_snapshots) *too_few_snapshots = false;

  // user -> (snapshot -> betweenness); presence = appeared as a node.
  std::map<std::string, std::vector<double>> traj;
  std::map<std::string, int> presence;
  for (std::size_t si = 0; si < snaps.size(); ++si) {
    const auto g = build_graph(posts, snaps[si], nullptr, roots);
    const auto bc = betweenness_centrality(g);
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      const std::string& id = g.node_id(v);
      auto& tv = traj[id];
      tv.resize(snaps.size(), 0.0);
      tv[si] = bc.scores[v];
      ++presence[id];
    }
  }

  int total = 0;
  for (auto& [id, tv] : traj) {
    if (presence[id] < cfg.min_presence) continue;
    tv.resize(snaps.size(), 0.0);
    total += detail::count_direction_changes(tv);
  }
  return static_cast<double>(total);
}

inline double rotating_leadership_month(
    const std::vector<ForumPost>& posts, YearMonth ym,
    const RotatingLeadershipConfig& cfg = {},
    bool* too_few_snapshots = nullptr, const RootIndex* roots = nullptr) {
  return rotating_leadership(posts, TimeWindow::for_month(ym), cfg,
                             too_few_snapshots, roots);
}

// ---------------------------------------------------------------------------
// Simple monthly aggregates
// ---------------------------------------------------------------------------

// Number of reply interactions in the window (arc multiplicity included).
inline std::size_t activity(const InteractionGraph& g) {
  return g.arc_count();
}

// Users whose earliest post across the whole corpus falls in the month.
inline std::size_t new_users(const std::vector<ForumPost>& posts,
                             YearMonth ym) {
  std::unordered_map<std::string, std::int64_t> first_post;
  for (const auto& p : posts) {
    auto [it, inserted] = first_post.emplace(p.author_id, p.timestamp);
    if (!inserted && p.timestamp < it->second) it->second = p.timestamp;
  }
  const TimeWindow win = TimeWindow::for_month(ym);
  std::size_t n = 0;
  for (const auto& [user, ts] : first_post) {
    if (win.contains(ts)) ++n;
  }
  return n;
}

// Users whose earliest post falls in each month of [start, start+n_months).
inline std::vector<std::size_t> new_users_by_month(
    const std::vector<ForumPost>& posts, YearMonth start, int n_months) {
  std::unordered_map<std::string, std::int64_t> first_post;
  for (const auto& p : posts) {
    auto [it, inserted] = first_post.emplace(p.author_id, p.timestamp);
    if (!inserted && p.timestamp < it->second) it->second = p.timestamp;
  }
  std::vector<std::size_t> out(static_cast<std::size_t>(n_months), 0);
  for (const auto& [user, ts] : first_post) {
    const int off = month_of_instant(ts).index() - start.index();
    if (off >= 0 && off < n_months) ++out[static_cast<std::size_t>(off)];
  }
  return out;
}

// Mean hours between a post in the month and the immediately preceding post
// of the same thread (which may lie before the month). Threads are assembled
// across the whole corpus; missing when the month has no such gaps.
inline double avg_response_time_hours(const std::vector<ForumPost>& posts,
                                      YearMonth ym) {
  std::map<std::string, std::vector<std::int64_t>> threads;
  for (const auto& p : posts) threads[p.thread_id].push_back(p.timestamp);
  const TimeWindow win = TimeWindow::for_month(ym);
  double sum = 0.0;
  std::size_t n = 0;
  for (auto& [tid, ts] : threads) {
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (win.contains(ts[i])) {
        sum += static_cast<double>(ts[i] - ts[i - 1]) / 3600.0;
        ++n;
      }
    }
  }
  if (n == 0) return missing_value();
  return sum / static_cast<double>(n);
}

// Per-month mean response times over [start, start+n_months) in one pass;
// months without any reply gap are missing.
inline std::vector<double> avg_response_time_by_month(
    const std::vector<ForumPost>& posts, YearMonth start, int n_months) {
  std::map<std::string, std::vector<std::int64_t>> threads;
  for (const auto& p : posts) threads[p.thread_id].push_back(p.timestamp);
  std::vector<double> sum(static_cast<std::size_t>(n_months), 0.0);
  std::vector<std::size_t> cnt(static_cast<std::size_t>(n_months), 0);
  for (auto& [tid, ts] : threads) {
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      const int off = month_of_instant(ts[i]).index() - start.index();
      if (off < 0 || off >= n_months) continue;
      sum[static_cast<std::size_t>(off)] +=
          static_cast<double>(ts[i] - ts[i - 1]) / 3600.0;
      ++cnt[static_cast<std::size_t>(off)];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n_months), missing_value());
  for (int t = 0; t < n_months; ++t) {
    if (cnt[static_cast<std::size_t>(t)] > 0) {
      out[static_cast<std::size_t>(t)] =
          sum[static_cast<std::size_t>(t)] /
          static_cast<double>(cnt[static_cast<std::size_t>(t)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline std::string serialize_edge_list(const InteractionGraph& g) {
  std::string out = "source,target,timestamp\n";
  for (const auto& a : g.arcs()) {
    out += g.node_id(a.source);
    out += ',';
    out += g.node_id(a.target);
    out += ',';
    out += format_instant(a.timestamp);
    out += '\n';
  }
  return out;
}

inline void write_edge_list(const std::filesystem::path& path,
                            const InteractionGraph& g) {
  write_text_file(path, serialize_edge_list(g));
}

}  // namespace forumcast::network
