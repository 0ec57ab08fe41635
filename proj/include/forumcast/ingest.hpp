#pragma once

// Raw data layer: forum posts, user profiles and external monthly series,
// together with their file formats and a deterministic synthetic-data
// generator for tests and demos.
//
// Posts travel in a pipe-separated format, one record per line:
//   post_id|thread_id|city|author_id|timestamp|is_root|language|body
// The body (last field) is escaped: backslash, newline, carriage return and
// pipe become \\ \n \r \| respectively. All other fields are forbidden to
// contain pipes or backslashes. Profiles and monthly series are plain CSV
// with a header row.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "core.hpp"

namespace forumcast::ingest {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ForumPost {
  std::string post_id;
  std::string thread_id;
  std::string city;
  std::string author_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  bool is_root = false;
  std::string language;
  std::string body;

  friend bool operator==(const ForumPost&, const ForumPost&) = default;
};

struct UserProfile {
  std::string user_id;
  std::string gender;   // "m", "f" or "u" (unknown)
  int age = -1;         // years; -1 when unknown
  int level = 0;        // contribution level, 0..6
  int photo_count = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

using ProfileMap = std::unordered_map<std::string, UserProfile>;

// ---------------------------------------------------------------------------
// Body escaping
// ---------------------------------------------------------------------------

inline std::string escape_body(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (char c : body) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '|': out += "\\|"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::optional<std::string> unescape_body(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) return std::nullopt;
    switch (s[++i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '|': out += '|'; break;
      default: return std::nullopt;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Posts file
// ---------------------------------------------------------------------------

namespace detail {

inline bool plain_field_ok(std::string_view f) {
  return f.find('|') == std::string_view::npos &&
         f.find('\\') == std::string_view::npos &&
         f.find('\n') == std::string_view::npos &&
         f.find('\r') == std::string_view::npos;
}

}  // namespace detail

// Parses the post file content. Malformed lines become record errors; the
// remaining records are accepted, sorted by (timestamp, post_id). Duplicate
// post ids, threads with several roots, and roots that are not the earliest
// post of their thread are corpus errors.
inline LoadResult<std::vector<ForumPost>> parse_posts(std::string_view content) {
  LoadResult<std::vector<ForumPost>> res;
  const auto lines = split_lines(content);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    const std::size_t lineno = li + 1;
    if (trim(line).empty()) continue;

    // First seven fields are plain; the remainder is the escaped body.
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    bool bad = false;
    for (int k = 0; k < 7; ++k) {
      const std::size_t pos = rest.find('|');
      if (pos == std::string_view::npos) {
        res.record_errors.push_back(
            {lineno, "expected 8 pipe-separated fields"});
        bad = true;
        break;
      }
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    if (bad) continue;

    ForumPost p;
    p.post_id = std::string(fields[0]);
    p.thread_id = std::string(fields[1]);
    p.city = std::string(fields[2]);
    p.author_id = std::string(fields[3]);
    if (p.post_id.empty() || p.thread_id.empty() || p.city.empty() ||
        p.author_id.empty()) {
      res.record_errors.push_back({lineno, "empty identifier field"});
      continue;
    }
    const auto ts = parse_instant(fields[4]);
    if (!ts) {
      res.record_errors.push_back(
          {lineno, "bad timestamp '" + std::string(fields[4]) + "'"});
      continue;
    }
    p.timestamp = *ts;
    if (fields[5] == "1") {
      p.is_root = true;
    } else if (fields[5] == "0") {
      p.is_root = false;
    } else {
      res.record_errors.push_back({lineno, "is_root must be 0 or 1"});
      continue;
    }
    p.language = std::string(fields[6]);
    auto body = unescape_body(rest);
    if (!body) {
      res.record_errors.push_back({lineno, "bad escape sequence in body"});
      continue;
    }
    p.body = std::move(*body);
    res.value.push_back(std::move(p));
  }

  // Corpus-level checks.
  std::unordered_set<std::string> seen, dup;
  for (const auto& p : res.value) {
    if (!seen.insert(p.post_id).second && dup.insert(p.post_id).second) {
      res.corpus_errors.push_back("duplicate post id '" + p.post_id + "'");
    }
  }
  struct ThreadInfo {
    std::int64_t earliest = 0;
    int roots = 0;
    std::int64_t root_ts = 0;
    std::string root_id;
    bool first = true;
  };
  std::map<std::string, ThreadInfo> threads;
  for (const auto& p : res.value) {
    auto& t = threads[p.thread_id];
    if (t.first || p.timestamp < t.earliest) t.earliest = p.timestamp;
    t.first = false;
    if (p.is_root) {
      ++t.roots;
      t.root_ts = p.timestamp;
      t.root_id = p.post_id;
    }
  }
  for (const auto& [tid, info] : threads) {
    if (info.roots > 1) {
      res.corpus_errors.push_back("thread '" + tid + "' has " +
                                  std::to_string(info.roots) + " root posts");
    } else if (info.roots == 1 && info.root_ts > info.earliest) {
      res.corpus_errors.push_back("thread '" + tid + "': root post '" +
                                  info.root_id +
                                  "' is later than an earlier reply");
    }
  }

  std::stable_sort(res.value.begin(), res.value.end(),
                   [](const ForumPost& a, const ForumPost& b) {
                     if (a.timestamp != b.timestamp)
                       return a.timestamp < b.timestamp;
                     return a.post_id < b.post_id;
                   });
  return res;
}

// Optional filters applied after parsing and corpus validation, so filtered
// loads still surface corpus-wide problems.
inline LoadResult<std::vector<ForumPost>> load_posts(
    const std::filesystem::path& path,
    const std::optional<std::string>& city_filter = std::nullopt,
    const std::optional<std::string>& language_filter = std::nullopt) {
  auto res = parse_posts(read_text_file(path));
  if (city_filter || language_filter) {
    std::erase_if(res.value, [&](const ForumPost& p) {
      return (city_filter && p.city != *city_filter) ||
             (language_filter && p.language != *language_filter);
    });
  }
  return res;
}

inline std::string serialize_posts(const std::vector<ForumPost>& posts) {
  std::string out;
  for (const auto& p : posts) {
    for (const std::string* f :
         {&p.post_id, &p.thread_id, &p.city, &p.author_id, &p.language}) {
      if (!detail::plain_field_ok(*f)) {
        throw ValidationError("post field contains a reserved character: '" +
                              *f + "'");
      }
    }
    out += p.post_id;
    out += '|';
    out += p.thread_id;
    out += '|';
    out += p.city;
    out += '|';
    out += p.author_id;
    out += '|';
    out += format_instant(p.timestamp);
    out += '|';
    out += p.is_root ? '1' : '0';
    out += '|';
    out += p.language;
    out += '|';
    out += escape_body(p.body);
    out += '\n';
  }
  return out;
}

inline void write_posts(const std::filesystem::path& path,
                        const std::vector<ForumPost>& posts) {
  write_text_file(path, serialize_posts(posts));
}

// ---------------------------------------------------------------------------
// Profiles CSV: user_id,gender,age,level,photo_count
// ---------------------------------------------------------------------------

inline constexpr std::string_view kProfilesHeader =
    "user_id,gender,age,level,photo_count";
inline constexpr int kMaxUserLevel = 6;

inline LoadResult<ProfileMap> parse_profiles(std::string_view content) {
  LoadResult<ProfileMap> res;
  const auto lines = split_lines(content);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t lineno = li + 1;
    std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    if (li == 0 && line == kProfilesHeader) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) {
      res.record_errors.push_back({lineno, "expected 5 comma-separated fields"});
      continue;
    }
    UserProfile u;
    u.user_id = std::string(trim(f[0]));
    if (u.user_id.empty()) {
      res.record_errors.push_back({lineno, "empty user_id"});
      continue;
    }
    std::string g(trim(f[1]));
    for (auto& c : g) c = static_cast<char>(std::tolower(c));
    if (g == "m" || g == "f" || g == "u") {
      u.gender = g;
    } else if (g.empty()) {
      u.gender = "u";
    } else {
      res.record_errors.push_back(
          {lineno, "gender must be m, f or u, got '" + std::string(trim(f[1])) +
                       "'"});
      continue;
    }
    if (trim(f[2]).empty()) {
      u.age = -1;
    } else if (auto a = parse_int(f[2]); a && *a >= 13 && *a <= 120) {
      u.age = static_cast<int>(*a);
    } else {
      res.record_errors.push_back({lineno, "age must be in 13..120"});
      continue;
    }
    if (auto l = parse_int(f[3]); l && *l >= 0 && *l <= kMaxUserLevel) {
      u.level = static_cast<int>(*l);
    } else {
      res.record_errors.push_back(
          {lineno, "level must be an integer in 0.." +
                       std::to_string(kMaxUserLevel)});
      continue;
    }
    if (auto ph = parse_int(f[4]); ph && *ph >= 0) {
      u.photo_count = static_cast<int>(*ph);
    } else {
      res.record_errors.push_back({lineno, "photo_count must be >= 0"});
      continue;
    }
    if (!res.value.emplace(u.user_id, u).second) {
      res.corpus_errors.push_back("duplicate user id '" + u.user_id + "'");
    }
  }
  return res;
}

inline LoadResult<ProfileMap> load_profiles(const std::filesystem::path& path) {
  return parse_profiles(read_text_file(path));
}

inline void write_profiles(const std::filesystem::path& path,
                           const std::vector<UserProfile>& profiles) {
  std::string out(kProfilesHeader);
  out += '\n';
  for (const auto& u : profiles) {
    out += u.user_id;
    out += ',';
    out += u.gender;
    out += ',';
    out += u.age < 0 ? std::string() : std::to_string(u.age);
    out += ',';
    out += std::to_string(u.level);
    out += ',';
    out += std::to_string(u.photo_count);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// External monthly series CSV: month,value  (months contiguous, ascending)
// ---------------------------------------------------------------------------

inline LoadResult<MonthlySeries> parse_series(std::string_view content,
                                              std::string name) {
  LoadResult<MonthlySeries> res;
  res.value.name = std::move(name);
  std::vector<std::pair<YearMonth, double>> rows;
  const auto lines = split_lines(content);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t lineno = li + 1;
    std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    if (li == 0 && line == "month,value") continue;
    const auto f = split(line, ',');
    if (f.size() != 2) {
      res.record_errors.push_back({lineno, "expected 2 comma-separated fields"});
      continue;
    }
    const auto ym = YearMonth::parse(trim(f[0]));
    if (!ym) {
      res.record_errors.push_back(
          {lineno, "bad month '" + std::string(trim(f[0])) + "'"});
      continue;
    }
    const auto v = parse_double(f[1]);
    if (!v || !std::isfinite(*v)) {
      res.record_errors.push_back({lineno, "bad value"});
      continue;
    }
    if (*v < 0) {
      res.record_errors.push_back(
          {lineno, "negative value " + std::string(trim(f[1]))});
      continue;
    }
    rows.emplace_back(*ym, *v);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].first == rows[i + 1].first) {
      res.corpus_errors.push_back("duplicate month " + rows[i].first.str());
    } else {
      for (int k = rows[i].first.index() + 1; k < rows[i + 1].first.index();
           ++k) {
        res.corpus_errors.push_back("gap at " + YearMonth::from_index(k).str());
      }
    }
  }
  if (!rows.empty()) {
    res.value.start = rows.front().first;
    res.value.values.assign(
        static_cast<std::size_t>(rows.back().first.index() -
                                 rows.front().first.index() + 1),
        missing_value());
    for (const auto& [ym, v] : rows) {
      res.value.values[static_cast<std::size_t>(ym.index() -
                                                res.value.start.index())] = v;
    }
  }
  return res;
}

inline LoadResult<MonthlySeries> load_series(const std::filesystem::path& path,
                                             std::string name) {
  return parse_series(read_text_file(path), std::move(name));
}

inline std::string serialize_series(const MonthlySeries& s) {
  std::string out = "month,value\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (is_missing(s.values[i])) continue;
    out += s.month_at(i).str();
    out += ',';
    out += format_double(s.values[i]);
    out += '\n';
  }
  return out;
}

inline void write_series(const std::filesystem::path& path,
                         const MonthlySeries& s) {
  write_text_file(path, serialize_series(s));
}

// ---------------------------------------------------------------------------
// Sentiment lexicon CSV: word,weight
// ---------------------------------------------------------------------------

inline LoadResult<std::vector<std::pair<std::string, double>>> parse_lexicon(
    std::string_view content) {
  LoadResult<std::vector<std::pair<std::string, double>>> res;
  const auto lines = split_lines(content);
  std::set<std::string> seen;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t lineno = li + 1;
    std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    if (li == 0 && line == "word,weight") continue;
    const auto f = split(line, ',');
    if (f.size() != 2) {
      res.record_errors.push_back({lineno, "expected 2 comma-separated fields"});
      continue;
    }
    std::string w(trim(f[0]));
    const auto v = parse_double(f[1]);
    if (w.empty() || !v || !std::isfinite(*v)) {
      res.record_errors.push_back({lineno, "bad lexicon entry"});
      continue;
    }
    if (*v < -1.0 || *v > 1.0) {
      res.record_errors.push_back({lineno, "weight must be in [-1,1]"});
      continue;
    }
    if (!seen.insert(w).second) {
      res.corpus_errors.push_back("duplicate lexicon word '" + w + "'");
      continue;
    }
    res.value.emplace_back(std::move(w), *v);
  }
  return res;
}

inline void write_lexicon(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, double>>& lexicon) {
  std::string out = "word,weight\n";
  for (const auto& [w, v] : lexicon) {
    out += w;
    out += ',';
    out += format_double(v);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Synthetic data generator
// ---------------------------------------------------------------------------
//
// One latent monthly factor drives four observable channels: posting volume,
// concentration of replies on hub users' threads (network centralization),
// the share of positive sentiment words, and the share of rare vocabulary
// (text complexity). The target series is an autoregression in levels with a
// seasonal pattern plus a one-month-lagged response to the factor, so that
// factor-augmented models have genuine signal to find. All randomness flows
// through a single 64-bit Mersenne Twister seeded from `seed`: equal configs
// give bit-identical corpora.

struct SyntheticConfig {
  std::string city = "sampletown";
  YearMonth start{2007, 1};
  int n_months = 120;
  int n_users = 400;
  double posts_per_month = 900.0;
  double hub_fraction = 0.05;
  int vocabulary_size = 2500;
  double latent_rho = 0.5;            // AR(1) of the latent factor
  double factor_loading = 9000.0;     // target response to lagged factor
  double noise_sd = 6000.0;           // target innovation sd
  std::vector<double> target_ar = {0.8};
  double target_mean = 1.0e6;
  double seasonal_amplitude = 0.12;   // relative seasonal swing of the target
  std::uint64_t seed = 42;
};

struct SyntheticData {
  std::vector<ForumPost> posts;
  std::vector<UserProfile> profiles;
  MonthlySeries target;
  MonthlySeries trend_flights;
  MonthlySeries trend_holidays;
  std::vector<std::pair<std::string, double>> lexicon;
  std::vector<double> latent;  // the hidden monthly factor, for diagnostics
};

namespace detail {

inline std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_months < 1 || cfg.n_users < 2 || cfg.posts_per_month <= 0 ||
      cfg.vocabulary_size < 200) {
    throw ValidationError("synthetic config out of range");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticData out;

  // Latent factor: stationary AR(1) with unit marginal variance.
  const double rho = cfg.latent_rho;
  const double innov_sd = std::sqrt(std::max(1e-12, 1.0 - rho * rho));
  out.latent.resize(static_cast<std::size_t>(cfg.n_months));
  double m = stdnorm(rng);
  for (int t = 0; t < cfg.n_months; ++t) {
    out.latent[static_cast<std::size_t>(t)] = m;
    m = rho * m + innov_sd * stdnorm(rng);
  }

  // Vocabulary and lexicon. Words w0000.. with Zipf-like head weights; the
  // upper half of the vocabulary is the "rare" tail. 60 positive and 60
  // negative sentiment words are drawn from the head.
  const int V = cfg.vocabulary_size;
  std::vector<std::string> vocab(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) {
    vocab[static_cast<std::size_t>(i)] = "w" + detail::zero_pad(i, 5);
  }
  std::vector<double> zipf(static_cast<std::size_t>(V));
  double zsum = 0.0;
  for (int i = 0; i < V; ++i) {
    zipf[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(i + 1);
    zsum += zipf[static_cast<std::size_t>(i)];
  }
  for (auto& z : zipf) z /= zsum;
  std::discrete_distribution<int> zipf_draw(zipf.begin(), zipf.end());
  const int tail_begin = V / 2;
  std::uniform_int_distribution<int> tail_draw(tail_begin, V - 1);

  const int n_sentiment = std::min(60, V / 20);
  for (int i = 0; i < n_sentiment; ++i) {
    out.lexicon.emplace_back("pos" + detail::zero_pad(i, 3), 1.0);
    out.lexicon.emplace_back("neg" + detail::zero_pad(i, 3), -1.0);
  }

  // Users. Hubs are the first ceil(hub_fraction * n_users) users.
  const int n_hubs = static_cast<int>(
      std::ceil(cfg.hub_fraction * static_cast<double>(cfg.n_users)));
  std::vector<int> join_month(static_cast<std::size_t>(cfg.n_users), 0);
  std::uniform_int_distribution<int> month_draw(0, cfg.n_months - 1);
  std::discrete_distribution<int> level_draw({30, 25, 18, 12, 8, 5, 2});
  std::uniform_int_distribution<int> age_draw(18, 80);
  std::geometric_distribution<int> photo_draw(0.02);
  for (int u = 0; u < cfg.n_users; ++u) {
    UserProfile p;
    p.user_id = cfg.city + "-u" + detail::zero_pad(u, 5);
    const double g = unif(rng);
    p.gender = g < 0.52 ? "m" : (g < 0.95 ? "f" : "u");
    p.age = age_draw(rng);
    p.level = level_draw(rng);
    p.photo_count = std::min(photo_draw(rng), 2000);
    out.profiles.push_back(std::move(p));
    join_month[static_cast<std::size_t>(u)] =
        (unif(rng) < 0.4) ? 0 : month_draw(rng);
  }

  // Posts, month by month.
  std::exponential_distribution<double> gap_draw(1.0);
  int post_counter = 0;
  int thread_counter = 0;
  for (int t = 0; t < cfg.n_months; ++t) {
    const double mt = out.latent[static_cast<std::size_t>(t)];
    const YearMonth ym = cfg.start.plus(t);
    const TimeWindow win = TimeWindow::for_month(ym);
    const double span = static_cast<double>(win.end - win.begin);

    std::vector<int> active;
    for (int u = 0; u < cfg.n_users; ++u) {
      if (join_month[static_cast<std::size_t>(u)] <= t) active.push_back(u);
    }
    if (active.size() < 2) continue;
    std::uniform_int_distribution<int> user_draw(
        0, static_cast<int>(active.size()) - 1);

    std::poisson_distribution<int> count_draw(cfg.posts_per_month *
                                              std::exp(0.10 * mt));
    const int n_posts = std::max(2, count_draw(rng));
    const int n_threads = std::max(1, n_posts / 6);

    struct ThreadStub {
      std::string id;
      std::int64_t root_ts;
      int root_author;
      bool hub;
    };
    std::vector<ThreadStub> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));

    auto make_body = [&](double sentiment_bias) {
      std::uniform_int_distribution<int> len_draw(5, 25);
      const int len = len_draw(rng);
      std::string body;
      const double p_rare =
          0.12 + 0.06 * std::tanh(mt);  // rare-word share rises with factor
      const double p_sent = 0.18;
      for (int k = 0; k < len; ++k) {
        if (!body.empty()) body += ' ';
        const double roll = unif(rng);
        if (roll < p_sent) {
          const bool positive = unif(rng) < sentiment_bias;
          std::uniform_int_distribution<int> sw(0, n_sentiment - 1);
          body += (positive ? "pos" : "neg") + detail::zero_pad(sw(rng), 3);
        } else if (roll < p_sent + p_rare) {
          body += vocab[static_cast<std::size_t>(tail_draw(rng))];
        } else {
          body += vocab[static_cast<std::size_t>(zipf_draw(rng))];
        }
      }
      return body;
    };
    const double sentiment_bias = 1.0 / (1.0 + std::exp(-0.5 * mt));

    for (int k = 0; k < n_threads; ++k) {
      ThreadStub stub;
      stub.id = cfg.city + "-t" + detail::zero_pad(thread_counter++, 7);
      stub.root_ts =
          win.begin + static_cast<std::int64_t>(unif(rng) * (span - 86400.0));
      // Hub users root a disproportionate share of threads.
      if (n_hubs > 0 && unif(rng) < 0.5) {
        std::uniform_int_distribution<int> hub_draw(0, n_hubs - 1);
        int candidate = hub_draw(rng);
        stub.root_author =
            join_month[static_cast<std::size_t>(candidate)] <= t
                ? candidate
                : active[static_cast<std::size_t>(user_draw(rng))];
      } else {
        stub.root_author = active[static_cast<std::size_t>(user_draw(rng))];
      }
      stub.hub = stub.root_author < n_hubs;
      threads.push_back(stub);

      ForumPost p;
      p.post_id = cfg.city + "-p" + detail::zero_pad(post_counter++, 8);
      p.thread_id = stub.id;
      p.city = cfg.city;
      p.author_id =
          out.profiles[static_cast<std::size_t>(stub.root_author)].user_id;
      p.timestamp = stub.root_ts;
      p.is_root = true;
      p.language = "en";
      p.body = make_body(sentiment_bias);
      out.posts.push_back(std::move(p));
    }

    // Replies. When the factor is high, replies concentrate on hub threads,
    // raising degree and betweenness centralization, and arrive faster,
    // lowering the average response time.
    std::vector<double> thread_weight(threads.size());
    const double hub_boost = 8.0 * std::exp(0.35 * mt);
    for (std::size_t i = 0; i < threads.size(); ++i) {
      thread_weight[i] = threads[i].hub ? hub_boost : 1.0;
    }
    std::discrete_distribution<int> thread_draw(thread_weight.begin(),
                                                thread_weight.end());
    const double mean_gap_s = 6.0 * 3600.0 * std::exp(-0.2 * mt);
    const int n_replies = n_posts - static_cast<int>(threads.size());
    for (int k = 0; k < n_replies; ++k) {
      const auto& stub =
          threads[static_cast<std::size_t>(thread_draw(rng))];
      ForumPost p;
      p.post_id = cfg.city + "-p" + detail::zero_pad(post_counter++, 8);
      p.thread_id = stub.id;
      p.city = cfg.city;
      p.author_id =
          out.profiles[static_cast<std::size_t>(
                           active[static_cast<std::size_t>(user_draw(rng))])]
              .user_id;
      std::int64_t ts =
          stub.root_ts +
          static_cast<std::int64_t>(gap_draw(rng) * mean_gap_s) + 60;
      if (ts >= win.end) ts = win.end - 1;
      p.timestamp = ts;
      p.is_root = false;
      p.language = "en";
      p.body = make_body(sentiment_bias);
      out.posts.push_back(std::move(p));
    }
  }

  std::stable_sort(out.posts.begin(), out.posts.end(),
                   [](const ForumPost& a, const ForumPost& b) {
                     if (a.timestamp != b.timestamp)
                       return a.timestamp < b.timestamp;
                     return a.post_id < b.post_id;
                   });

  // Target: seasonal autoregression in levels plus the lagged factor.
  const int p_ar = static_cast<int>(cfg.target_ar.size());
  double phi_sum = 0.0;
  for (double f : cfg.target_ar) phi_sum += f;
  if (phi_sum >= 0.999) {
    throw ValidationError("target_ar coefficients must sum below 1");
  }
  const double intercept = cfg.target_mean * (1.0 - phi_sum);
  out.target.name = "target_arrivals";
  out.target.start = cfg.start;
  out.target.values.resize(static_cast<std::size_t>(cfg.n_months));
  std::vector<double> core(static_cast<std::size_t>(cfg.n_months));
  for (int t = 0; t < cfg.n_months; ++t) {
    double v = intercept + cfg.noise_sd * stdnorm(rng);
    for (int i = 1; i <= p_ar; ++i) {
      const double prev = t - i >= 0 ? core[static_cast<std::size_t>(t - i)]
                                     : cfg.target_mean;
      v += cfg.target_ar[static_cast<std::size_t>(i - 1)] * prev;
    }
    if (t >= 1) {
      v += cfg.factor_loading * out.latent[static_cast<std::size_t>(t - 1)];
    }
    core[static_cast<std::size_t>(t)] = v;
    const double season =
        1.0 + cfg.seasonal_amplitude *
                  std::sin(2.0 * M_PI * static_cast<double>(t % 12) / 12.0);
    out.target.values[static_cast<std::size_t>(t)] =
        std::max(1.0, v * season);
  }

  // External interest series: seasonal, factor-correlated, clamped to 0..100.
  auto make_trend = [&](const char* name, double phase, double load) {
    MonthlySeries s;
    s.name = name;
    s.start = cfg.start;
    s.values.resize(static_cast<std::size_t>(cfg.n_months));
    for (int t = 0; t < cfg.n_months; ++t) {
      double v = 52.0 +
                 22.0 * std::sin(2.0 * M_PI *
                                     (static_cast<double>(t % 12) / 12.0) +
                                 phase) +
                 load * out.latent[static_cast<std::size_t>(t)] +
                 4.0 * stdnorm(rng);
      s.values[static_cast<std::size_t>(t)] =
          std::clamp(v, 0.0, 100.0);
    }
    return s;
  };
  out.trend_flights = make_trend("google_trend_flights", 0.4, 9.0);
  out.trend_holidays = make_trend("google_trend_holidays", 1.1, 6.0);

  return out;
}

}  // namespace forumcast::ingest
