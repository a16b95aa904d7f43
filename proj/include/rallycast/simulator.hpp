#pragma once

// Synthetic matches: label sequences from a coupled two-player Markov model,
// noisy per-window scores, and template commentary with verb synonyms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/lexicon.hpp"
#include "rallycast/matrix.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t num_upper = 8;
  std::size_t num_lower = 8;
  /// Players drawn (two distinct per match) from the first num_players names.
  std::size_t num_players = 8;
  std::size_t sequence_length = 18;
  double noise_sigma = 0.5;
  /// Symmetric Dirichlet concentration of each transition row; small values
  /// give sharp, predictable play.
  double concentration = 30.0;
  /// Extra self-transition mass on the within-player matrices (p11, p22):
  /// row = persistence * e_self + (1 - persistence) * Dirichlet row. A phrase
  /// usually spans several overlapping windows.
  double persistence = 0.0;
  /// Consecutive windows covered by one drawn label pair; a phrase lasts
  /// longer than the stride between overlapping windows.
  std::size_t windows_per_phrase = 6;
  /// Slots: {p1} upper player, {p2} lower player, {up} upper phrases, {lp} lower phrases.
  std::vector<std::string> corpus_templates = {
      "{p1} {up} while {p2} {lp}",
      "{p2} {lp} as {p1} {up}",
      "{p1} {up} and {p2} replies, {lp}",
      "point for {p1} who {up} after {p2} {lp}",
  };
  /// Probability that a phrase verb is written as one of its synonyms.
  double synonym_rate = 0.5;
  std::size_t corpus_size = 200;
  std::size_t training_matches = 200;
  std::size_t window_stride = 5;
  std::size_t window_size = 30;
  /// Logistic gain applied to (one-hot + noise - 0.5) when squashing scores.
  double score_gain = 4.0;
};

namespace detail {

struct VerbEntry {
  const char* verb;
  std::array<const char*, 2> synonyms;
};

inline constexpr std::array<VerbEntry, 16> kVerbs{{
    {"hits", {"strikes", "smacks"}},    {"plays", {"produces", "executes"}},
    {"returns", {"blocks", "fends"}},   {"slices", {"cuts", "carves"}},
    {"drives", {"powers", "pushes"}},   {"lobs", {"floats", "loops"}},
    {"smashes", {"slams", "crushes"}},  {"whips", {"flicks", "snaps"}},
    {"punches", {"jabs", "stabs"}},     {"blasts", {"hammers", "pounds"}},
    {"steers", {"directs", "threads"}}, {"rolls", {"spins", "curls"}},
    {"dinks", {"nudges", "taps"}},      {"chops", {"hacks", "clips"}},
    {"rips", {"tears", "lashes"}},      {"guides", {"eases", "coaxes"}},
}};

inline constexpr std::array<const char*, 16> kShots{
    "forehand", "backhand", "volley",     "overhead", "tweener", "moonball", "dropshot", "passer",
    "approach", "chip",     "halfvolley", "kicker",   "pickup",  "skidder",  "topspinner", "sitter"};

struct PlacementEntry {
  const char* text;
  std::array<const char*, 2> paraphrases;
};

// Content words (stems) belong to a single placement so that co-occurrence,
// not shared spelling, is what links a paraphrase to the canonical wording.
// Every wording is three words long, so length does not reveal the choice.
inline constexpr std::array<PlacementEntry, 16> kPlacements{{
    {"down the line", {"along the alley", "up the tramline"}},
    {"across the court", {"across the diagonal", "on the diagonal"}},
    {"to the baseline", {"to the backcourt", "near the baseline"}},
    {"short and wide", {"short and sharp", "wide and shallow"}},
    {"into the net", {"into the tape", "into the netcord"}},
    {"at the body", {"into the body", "at the chest"}},
    {"into the corner", {"into the pocket", "to the corner"}},
    {"onto the sideline", {"onto the chalk", "on the sideline"}},
    {"past the rusher", {"beyond the rusher", "by the attacker"}},
    {"into the box", {"inside the box", "into the forecourt"}},
    {"at the feet", {"at the shoelaces", "at the toes"}},
    {"into the gap", {"into the space", "into the opening"}},
    {"off the frame", {"off the rim", "off the wood"}},
    {"around the post", {"outside the netpost", "round the post"}},
    {"behind the opponent", {"behind the rival", "wrongfooting the opponent"}},
    {"toward the umpire", {"toward the chair", "at the umpire"}},
}};

inline constexpr std::array<const char*, 16> kPlayers{
    "Federer", "Nadal",  "Djokovic", "Murray",   "Wawrinka", "Berdych", "Ferrer",  "Tsonga",
    "Nishikori", "Raonic", "Cilic",   "Dimitrov", "Monfils",  "Gasquet", "Isner", "Anderson"};

inline std::size_t max_phrases() { return kVerbs.size() * kShots.size() * kPlacements.size(); }

// Phrase number i as (verb, shot, placement) digits: a bijection on
// [0, max_phrases()), and phrases 0..15 share no verb, shot or placement.
inline std::string phrase_text(std::size_t i) {
  const std::size_t n = kVerbs.size();
  const std::size_t a = i % n, b = i / n % n, c = i / (n * n);
  const std::string shot = kShots[(a + b) % n];
  const char* article = std::string("aeiou").find(shot.front()) != std::string::npos ? " an " : " a ";
  return std::string(kVerbs[a].verb) + article + shot + " " + kPlacements[(a + 3 * b + c) % n].text;
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

} // namespace detail

/// Deterministic lexicon for the given side sizes; the sides interleave over
/// the phrase table so they never share a phrase.
inline PhraseLexicon sim_lexicon(const SimConfig& cfg) {
  const std::size_t n = detail::max_phrases();
  if (cfg.num_upper < 1 || cfg.num_lower < 1 || cfg.num_upper > n / 2 || cfg.num_lower > n / 2)
    throw UsageError("simulator lexicon sizes must be in [1, " + std::to_string(n / 2) + "]");
  std::vector<std::string> upper, lower;
  for (std::size_t i = 0; i < cfg.num_upper; ++i) upper.push_back(detail::phrase_text(2 * i));
  for (std::size_t i = 0; i < cfg.num_lower; ++i) lower.push_back(detail::phrase_text(2 * i + 1));
  return PhraseLexicon(std::move(upper), std::move(lower));
}

namespace detail {

inline void dirichlet_rows(Matrix& m, double concentration, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double total = 0.0;
    for (double& x : m.row(r)) {
      // Floor keeps every entry strictly positive for tiny concentrations.
      x = std::max(gamma(rng), 1e-12);
      total += x;
    }
    for (double& x : m.row(r)) x /= total;
  }
}

template <typename Weights>
std::size_t sample_index(const Weights& w, std::mt19937_64& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  std::uniform_real_distribution<double> u(0.0, total);
  double target = u(rng), acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (target < acc) return i;
  }
  return w.size() - 1;
}

} // namespace detail

inline TransitionModel gen_transition_model(const SimConfig& cfg) {
  if (cfg.num_upper < 1 || cfg.num_lower < 1) throw UsageError("lexicon sizes must be >= 1");
  if (!(cfg.concentration > 0.0)) throw UsageError("concentration must be > 0");
  std::mt19937_64 rng(cfg.seed ^ 0x7472616e73ULL);
  TransitionModel m{Matrix(cfg.num_upper, cfg.num_upper), Matrix(cfg.num_upper, cfg.num_lower),
                    Matrix(cfg.num_lower, cfg.num_lower), Matrix(cfg.num_lower, cfg.num_upper),
                    cfg.concentration};
  for (Matrix* p : {&m.p11, &m.p12, &m.p22, &m.p21}) detail::dirichlet_rows(*p, cfg.concentration, rng);
  if (!(cfg.persistence >= 0.0 && cfg.persistence < 1.0)) throw UsageError("persistence must be in [0, 1)");
  for (Matrix* p : {&m.p11, &m.p22})
    for (std::size_t r = 0; r < p->rows; ++r)
      for (std::size_t c = 0; c < p->cols; ++c)
        (*p)(r, c) = (1.0 - cfg.persistence) * (*p)(r, c) + (r == c ? cfg.persistence : 0.0);
  return m;
}

/// LSI rank used on simulated corpora: one latent concept per lexicon phrase.
inline std::size_t sim_lsi_rank(const SimConfig& cfg) { return cfg.num_upper + cfg.num_lower; }

/// Next-pair distribution of the generator: upper ~ p11[u] * p21[l] and
/// lower ~ p22[l] * p12[u], each renormalized.
inline std::pair<std::vector<double>, std::vector<double>>
coupled_next(const TransitionModel& trans, LabelPair state) {
  const auto [u, l] = state;
  std::vector<double> up(trans.upper_labels()), lo(trans.lower_labels());
  double su = 0.0, sl = 0.0;
  for (std::size_t j = 0; j < up.size(); ++j) su += up[j] = trans.p11(u, j) * trans.p21(l, j);
  for (std::size_t j = 0; j < lo.size(); ++j) sl += lo[j] = trans.p22(l, j) * trans.p12(u, j);
  for (double& x : up) x /= su;
  for (double& x : lo) x /= sl;
  return {std::move(up), std::move(lo)};
}

struct SimMatch {
  LabelSequence labels;
  ScoreSequence scores;
  std::vector<std::string> players; // upper, lower
  std::string commentary;
};

class Simulator {
public:
  Simulator(SimConfig cfg, TransitionModel trans)
      : cfg_(std::move(cfg)), trans_(std::move(trans)), lexicon_(sim_lexicon(cfg_)), rng_(cfg_.seed) {
    if (cfg_.windows_per_phrase < 1) throw UsageError("windows_per_phrase must be >= 1");
    if (cfg_.sequence_length < 1) throw UsageError("sequence_length must be >= 1");
    if (!(cfg_.noise_sigma >= 0.0)) throw UsageError("noise_sigma must be >= 0");
    if (cfg_.num_players < 2 || cfg_.num_players > detail::kPlayers.size())
      throw UsageError("num_players must be in [2, " + std::to_string(detail::kPlayers.size()) + "]");
    if (cfg_.corpus_templates.empty()) throw UsageError("at least one commentary template is required");
    if (trans_.upper_labels() != cfg_.num_upper || trans_.lower_labels() != cfg_.num_lower)
      throw UsageError("transition model does not match the configured lexicon sizes");
  }

  const PhraseLexicon& lexicon() const { return lexicon_; }
  const TransitionModel& transitions() const { return trans_; }
  const SimConfig& config() const { return cfg_; }

  /// Walks the coupled chain; each drawn pair is held for windows_per_phrase
  /// windows (the last one truncated to the sequence length).
  LabelSequence gen_labels() {
    LabelSequence seq;
    std::uniform_int_distribution<std::size_t> u0(0, cfg_.num_upper - 1), l0(0, cfg_.num_lower - 1);
    LabelPair state{u0(rng_), l0(rng_)};
    while (true) {
      for (std::size_t i = 0; i < cfg_.windows_per_phrase; ++i) {
        if (seq.size() == cfg_.sequence_length) return seq;
        seq.push_back(state);
      }
      const auto [up, lo] = coupled_next(trans_, state);
      const std::size_t nu = detail::sample_index(up, rng_);
      const std::size_t nl = detail::sample_index(lo, rng_);
      state = {nu, nl};
    }
  }

  /// Scores are logistic(gain * (one_hot + N(0, sigma) - 0.5)).
  ScoreSequence gen_scores(const LabelSequence& labels, const std::string& video_id) {
    ScoreSequence s{video_id, cfg_.window_stride, cfg_.window_size,
                    Matrix(labels.size(), cfg_.num_upper), Matrix(labels.size(), cfg_.num_lower)};
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      for (Side side : {Side::upper, Side::lower}) {
        const std::size_t truth = side == Side::upper ? labels[t].first : labels[t].second;
        auto row = s.scores(side).row(t);
        for (std::size_t j = 0; j < row.size(); ++j) {
          const double v = (j == truth ? 1.0 : 0.0) + cfg_.noise_sigma * noise(rng_) - 0.5;
          row[j] = 1.0 / (1.0 + std::exp(-cfg_.score_gain * v));
        }
      }
    }
    return s;
  }

  std::vector<std::string> gen_players() {
    std::uniform_int_distribution<std::size_t> pick(0, cfg_.num_players - 1);
    const std::size_t a = pick(rng_);
    std::size_t b = pick(rng_);
    while (b == a) b = pick(rng_);
    return {detail::kPlayers[a], detail::kPlayers[b]};
  }

  /// Fills a randomly chosen template with the sequence's distinct phrases in
  /// order of first appearance; verbs switch to synonyms at synonym_rate.
  std::string gen_commentary(const LabelSequence& labels, const std::vector<std::string>& players) {
    std::vector<std::size_t> ups, lows;
    for (const auto& [u, l] : labels) {
      if (std::find(ups.begin(), ups.end(), u) == ups.end()) ups.push_back(u);
      if (std::find(lows.begin(), lows.end(), l) == lows.end()) lows.push_back(l);
    }
    auto render = [&](const std::vector<std::size_t>& ids, Side side) {
      std::string out;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += i + 1 == ids.size() ? " and then " : ", ";
        out += maybe_synonym(lexicon_.phrase(side, ids[i]));
      }
      return out;
    };
    std::uniform_int_distribution<std::size_t> pick(0, cfg_.corpus_templates.size() - 1);
    std::string text = cfg_.corpus_templates[pick(rng_)];
    const std::string up = render(ups, Side::upper);
    const std::string lp = render(lows, Side::lower);
    text = detail::replace_all(text, "{p1}", players.at(0));
    text = detail::replace_all(text, "{p2}", players.at(1));
    text = detail::replace_all(text, "{up}", up);
    text = detail::replace_all(text, "{lp}", lp);
    return text;
  }

  SimMatch gen_match(const std::string& video_id) {
    SimMatch m;
    m.labels = gen_labels();
    m.scores = gen_scores(m.labels, video_id);
    m.players = gen_players();
    m.commentary = gen_commentary(m.labels, m.players);
    return m;
  }

  /// Background commentary lines from independent matches.
  std::vector<std::string> gen_corpus(std::size_t lines) {
    std::vector<std::string> out;
    out.reserve(lines);
    for (std::size_t i = 0; i < lines; ++i) {
      const auto labels = gen_labels();
      const auto players = gen_players();
      out.push_back(gen_commentary(labels, players));
    }
    return out;
  }

  /// Inserts the match's commentary at a random position and returns it.
  std::size_t insert_into_corpus(std::vector<std::string>& lines, const SimMatch& m) {
    const std::size_t pos = uniform_index(lines.size() + 1);
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(pos), m.commentary);
    return pos;
  }

  std::size_t uniform_index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(rng_);
  }

private:
  // Independently swaps the leading verb and the trailing placement for one
  // of their alternatives, each with probability synonym_rate.
  std::string maybe_synonym(std::string phrase) {
    std::bernoulli_distribution swap(cfg_.synonym_rate);
    std::uniform_int_distribution<std::size_t> which(0, 1);
    for (const auto& v : detail::kVerbs) {
      const std::string verb = v.verb;
      if (phrase.rfind(verb + " ", 0) != 0) continue;
      if (swap(rng_)) phrase = v.synonyms[which(rng_)] + phrase.substr(verb.size());
      break;
    }
    for (const auto& p : detail::kPlacements) {
      const std::string text = p.text;
      if (phrase.size() <= text.size() || phrase.compare(phrase.size() - text.size(), text.size(), text) != 0)
        continue;
      if (swap(rng_)) phrase = phrase.substr(0, phrase.size() - text.size()) + p.paraphrases[which(rng_)];
      break;
    }
    return phrase;
  }

  SimConfig cfg_;
  TransitionModel trans_;
  PhraseLexicon lexicon_;
  std::mt19937_64 rng_;
};

/// Fraction of per-window, per-side labels that agree.
inline double label_accuracy(const LabelSequence& truth, const LabelSequence& decoded) {
  if (truth.size() != decoded.size() || truth.empty())
    throw UsageError("label sequences differ in length");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < truth.size(); ++t)
    hits += (truth[t].first == decoded[t].first) + (truth[t].second == decoded[t].second);
  return static_cast<double>(hits) / static_cast<double>(2 * truth.size());
}

} // namespace rallycast
