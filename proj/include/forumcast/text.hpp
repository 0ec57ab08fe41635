#pragma once

// Language metrics: per-word TF-IDF surprisal ("complexity") and a pluggable
// sentiment scorer producing values in [0,1] with 0.5 as the neutral point.

#include <cctype>
#include <memory>
#include <unordered_map>

#include "core.hpp"
#include "ingest.hpp"

namespace forumcast::text {

using ingest::ForumPost;

// ---------------------------------------------------------------------------
// Tokenization: lowercase, split on runs of non-alphanumeric bytes. No
// stop-word removal — the IDF weighting already discounts ubiquitous words.
// ---------------------------------------------------------------------------

inline std::vector<std::string> tokenize(std::string_view body) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : body) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

struct TokenizedPost {
  std::string post_id;
  std::vector<std::string> tokens;
};

inline TokenizedPost tokenize_post(const ForumPost& p) {
  return TokenizedPost{p.post_id, tokenize(p.body)};
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
  std::size_t n_documents = 0;
  std::unordered_map<std::string, std::size_t> document_frequency;

  static CorpusStats build(const std::vector<TokenizedPost>& docs) {
    CorpusStats s;
    s.n_documents = docs.size();
    std::unordered_map<std::string, std::size_t> last_doc;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (const auto& w : docs[d].tokens) {
        auto [it, inserted] = last_doc.emplace(w, d);
        if (inserted || it->second != d) {
          it->second = d;
          ++s.document_frequency[w];
        }
      }
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------
//
// For a post with n tokens and vocabulary V, with q(w) the count of w in the
// post and p(w) the share of corpus documents containing w:
//   complexity = (1/n) * sum_{w in V} q(w) * ln(1/p(w))
// Zero iff every word of the post appears in every document; empty posts have
// no defined value.

inline double post_complexity(const TokenizedPost& post,
                              const CorpusStats& stats) {
  if (post.tokens.empty() || stats.n_documents == 0) return missing_value();
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& w : post.tokens) ++counts[w];
  double acc = 0.0;
  for (const auto& [w, q] : counts) {
    const auto it = stats.document_frequency.find(w);
    if (it == stats.document_frequency.end() || it->second == 0) {
      throw ComputationError("corpus statistics do not cover word '" + w +
                             "'");
    }
    const double p = static_cast<double>(it->second) /
                     static_cast<double>(stats.n_documents);
    acc += static_cast<double>(q) * std::log(1.0 / p);
  }
  return acc / static_cast<double>(post.tokens.size());
}

// Mean post complexity over non-empty posts of one month's city corpus, with
// document frequencies taken from that same corpus (empty posts still count
// as documents). Missing when no non-empty post exists.
inline double monthly_complexity(const std::vector<ForumPost>& posts) {
  std::vector<TokenizedPost> docs;
  docs.reserve(posts.size());
  for (const auto& p : posts) docs.push_back(tokenize_post(p));
  const CorpusStats stats = CorpusStats::build(docs);
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) continue;
    acc += post_complexity(d, stats);
    ++n;
  }
  if (n == 0) return missing_value();
  return acc / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Sentiment
// ---------------------------------------------------------------------------

// Scores a post's text in [0,1]; 0.5 is neutral. Implementations outside this
// header may be plugged in; outputs are clamped at the call boundary so a
// misbehaving scorer cannot leak out-of-range values.
class SentimentScorer {
 public:
  virtual ~SentimentScorer() = default;
  virtual double score(std::string_view body) const = 0;
  virtual std::string name() const = 0;
};

inline double clamped_score(const SentimentScorer& scorer,
                            std::string_view body) {
  const double s = scorer.score(body);
  if (std::isnan(s)) return 0.5;
  return std::clamp(s, 0.0, 1.0);
}

// Default scorer: signed word weights in [-1,1] from a lexicon; post score is
// 0.5 + 0.5*tanh(mean weight of matched tokens), 0.5 when nothing matches.
class LexiconScorer final : public SentimentScorer {
 public:
  explicit LexiconScorer(
      const std::vector<std::pair<std::string, double>>& entries) {
    for (const auto& [w, v] : entries) weights_.emplace(w, v);
  }

  static LexiconScorer from_file(const std::filesystem::path& path) {
    auto res = ingest::parse_lexicon(read_text_file(path));
    if (!res.ok()) {
      throw ValidationError("bad lexicon file " + path.string() + ":\n" +
                            res.error_summary());
    }
    return LexiconScorer(res.value);
  }

  double score(std::string_view body) const override {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& tok : tokenize(body)) {
      const auto it = weights_.find(tok);
      if (it != weights_.end()) {
        acc += it->second;
        ++n;
      }
    }
    if (n == 0) return 0.5;
    return 0.5 + 0.5 * std::tanh(acc / static_cast<double>(n));
  }

  std::string name() const override { return "lexicon"; }

  std::size_t size() const { return weights_.size(); }

 private:
  std::unordered_map<std::string, double> weights_;
};

// Always 0.5; useful as an explicit no-signal baseline.
class NeutralScorer final : public SentimentScorer {
 public:
  double score(std::string_view) const override { return 0.5; }
  std::string name() const override { return "neutral"; }
};

// Mean clamped per-post score over the month; missing when no posts.
inline double monthly_sentiment(const std::vector<ForumPost>& posts,
                                const SentimentScorer& scorer) {
  if (posts.empty()) return missing_value();
  double acc = 0.0;
  for (const auto& p : posts) acc += clamped_score(scorer, p.body);
  return acc / static_cast<double>(posts.size());
}

}  // namespace forumcast::text
