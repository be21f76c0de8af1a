// Copyright 2026 The dpad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpad/data/sessions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dpad/error.hpp"
#include "dpad/rng.hpp"

namespace dpad::data {

void SyntheticLogModel::validate() const {
  if (vocab < 2) throw InputError("log model needs at least 2 tokens");
  if (start_tokens.empty()) throw InputError("log model has no start tokens");
  if (static_cast<int>(successors.size()) != vocab ||
      static_cast<int>(branch_probs.size()) != vocab ||
      static_cast<int>(terminal.size()) != vocab)
    throw InputError("log model arrays must cover every token");
  for (int t = 0; t < vocab; ++t) {
    if (successors[t].size() != branch_probs[t].size())
      throw InputError("token " + std::to_string(t) + ": successor/probability mismatch");
    if (successors[t].empty() && !terminal[t])
      throw InputError("token " + std::to_string(t) + " is a dead end but not terminal");
    double sum = 0.0;
    for (double p : branch_probs[t]) sum += p;
    if (!successors[t].empty() && std::abs(sum - 1.0) > 1e-9)
      throw InputError("token " + std::to_string(t) + ": branch probabilities sum to " +
                       std::to_string(sum));
    if (!std::is_sorted(successors[t].begin(), successors[t].end()))
      throw InputError("token " + std::to_string(t) + ": successors must be ascending");
  }
  // reachability from the start set
  std::vector<std::uint8_t> seen(vocab, 0);
  std::vector<int> stack(start_tokens);
  for (int s : start_tokens) seen[s] = 1;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int nx : successors[t])
      if (!seen[nx]) {
        seen[nx] = 1;
        stack.push_back(nx);
      }
  }
  for (int t = 0; t < vocab; ++t)
    if (!seen[t]) throw InputError("token " + std::to_string(t) + " is unreachable");
}

bool SyntheticLogModel::allowed(int prev, int next) const {
  const auto& succ = successors[prev];
  return std::binary_search(succ.begin(), succ.end(), next);
}

bool SyntheticLogModel::accepts(std::span<const int> session) const {
  if (session.empty()) return false;
  for (int t : session)
    if (t < 0 || t >= vocab) return false;
  if (std::find(start_tokens.begin(), start_tokens.end(), session.front()) ==
      start_tokens.end())
    return false;
  for (std::size_t i = 1; i < session.size(); ++i)
    if (!allowed(session[i - 1], session[i])) return false;
  return terminal[session.back()] != 0;
}

std::vector<int> SyntheticLogModel::intruder_pool(int prev, std::size_t max_size) const {
  std::vector<int> pool;
  for (int t = 0; t < vocab && pool.size() < max_size; ++t)
    if (!allowed(prev, t)) pool.push_back(t);
  return pool;
}

SyntheticLogModel SyntheticLogModel::workflow29() {
  SyntheticLogModel m;
  m.vocab = 29;
  m.start_tokens = {0};
  m.successors.assign(29, {});
  m.branch_probs.assign(29, {});
  m.terminal.assign(29, 0);
  auto arc = [&](int from, std::vector<int> to, std::vector<double> p) {
    m.successors[from] = std::move(to);
    m.branch_probs[from] = std::move(p);
  };
  arc(0, {1, 2}, {0.6, 0.4});
  arc(1, {3}, {1.0});
  arc(2, {3}, {1.0});
  arc(3, {4, 5, 6}, {0.5, 0.3, 0.2});
  arc(4, {4, 7}, {0.5, 0.5});
  arc(5, {5, 7}, {0.4, 0.6});
  arc(6, {7}, {1.0});
  arc(7, {8, 9}, {0.7, 0.3});
  arc(8, {10, 11}, {0.5, 0.5});
  arc(9, {10}, {1.0});
  arc(10, {8, 12}, {0.35, 0.65});
  arc(11, {12}, {1.0});
  arc(12, {13, 14, 15}, {0.4, 0.3, 0.3});
  arc(13, {16}, {1.0});
  arc(14, {16}, {1.0});
  arc(15, {16}, {1.0});
  arc(16, {17, 18}, {0.5, 0.5});
  arc(17, {19}, {1.0});
  arc(18, {19}, {1.0});
  arc(19, {20, 21, 22}, {0.3, 0.3, 0.4});
  arc(20, {19, 23}, {0.5, 0.5});
  arc(21, {19, 23}, {0.4, 0.6});
  arc(22, {23}, {1.0});
  arc(23, {24, 25}, {0.5, 0.5});
  arc(24, {25}, {1.0});
  arc(25, {25, 26, 27}, {0.5, 0.3, 0.2});
  arc(26, {27}, {1.0});
  arc(27, {28}, {1.0});
  m.terminal[28] = 1;
  // backbone tokens every session passes through
  m.anomaly_states = {12, 16, 19, 23};
  m.validate();
  return m;
}

namespace {

std::vector<int> walk(const SyntheticLogModel& m, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<int> session;
    int cur = m.start_tokens[static_cast<std::size_t>(
        rng.uniform_below(m.start_tokens.size()))];
    session.push_back(cur);
    while (!m.terminal[cur] || !m.successors[cur].empty()) {
      if (m.successors[cur].empty()) break;  // terminal dead end
      double u = rng.uniform01();
      int next = m.successors[cur].back();
      for (std::size_t k = 0; k < m.successors[cur].size(); ++k) {
        u -= m.branch_probs[cur][k];
        if (u < 0.0) {
          next = m.successors[cur][k];
          break;
        }
      }
      session.push_back(next);
      cur = next;
      if (static_cast<int>(session.size()) > m.max_len) break;
    }
    if (static_cast<int>(session.size()) <= m.max_len && m.terminal[cur]) return session;
  }
  throw GenerationError("automaton walk failed to terminate within the length cap");
}

// Corrupts a normal session with one of the anomaly kinds; the result is
// rejected by accepts() by construction.
std::vector<int> corrupt(const SyntheticLogModel& m, std::vector<int> session, Rng& rng) {
  // Anomalies are only placed where a window can later predict them.
  const std::size_t lo = std::min<std::size_t>(session.size() - 1, 11);
  auto position = [&]() -> std::size_t {
    if (!m.anomaly_states.empty()) {
      std::vector<std::size_t> candidates;
      for (std::size_t p = lo; p < session.size(); ++p) {
        for (int st : m.anomaly_states)
          if (session[p - 1] == st) {
            candidates.push_back(p);
            break;
          }
      }
      if (!candidates.empty())
        return candidates[static_cast<std::size_t>(rng.uniform_below(candidates.size()))];
    }
    return lo + static_cast<std::size_t>(rng.uniform_below(session.size() - lo));
  };

  const double u = rng.uniform01();
  if (u < m.p_swap) {
    const std::size_t p = position();
    const auto pool = m.intruder_pool(session[p - 1]);
    if (pool.empty()) throw GenerationError("no forbidden successor available for swap");
    session[p] = pool[static_cast<std::size_t>(rng.uniform_below(pool.size()))];
    return session;
  }
  if (u < m.p_swap + m.p_insert) {
    const std::size_t p = position();
    const auto pool = m.intruder_pool(session[p - 1]);
    if (pool.empty()) throw GenerationError("no forbidden successor available for insert");
    const int intruder = pool[static_cast<std::size_t>(rng.uniform_below(pool.size()))];
    session.insert(session.begin() + static_cast<std::ptrdiff_t>(p), intruder);
    return session;
  }
  // truncation: cut behind a non-terminal token
  for (std::size_t cut = session.size() - 1; cut >= 2; --cut) {
    if (!m.terminal[session[cut - 1]]) {
      session.resize(cut);
      return session;
    }
  }
  throw GenerationError("session cannot be truncated into an anomaly");
}

}  // namespace

SequenceCorpus gen_sessions(const SyntheticLogModel& model, int n_normal, int n_abnormal,
                            std::uint64_t seed) {
  model.validate();
  if (n_normal < 0 || n_abnormal < 0) throw InputError("session counts must be >= 0");
  if (n_abnormal > 0) {
    bool any_forbidden = false;
    for (int t = 0; t < model.vocab && !any_forbidden; ++t)
      any_forbidden = static_cast<int>(model.successors[t].size()) < model.vocab;
    if (!any_forbidden)
      throw GenerationError("automaton allows every transition; no anomaly exists");
  }

  SequenceCorpus corpus;
  corpus.vocab = model.vocab;
  Rng rng(mix_seed(seed, 0x5e5510ULL));
  for (int i = 0; i < n_normal; ++i) {
    corpus.sessions.push_back(walk(model, rng));
    corpus.labels.push_back(0);
  }
  for (int i = 0; i < n_abnormal; ++i) {
    for (int attempt = 0;; ++attempt) {
      auto candidate = corrupt(model, walk(model, rng), rng);
      if (!model.accepts(candidate)) {
        corpus.sessions.push_back(std::move(candidate));
        corpus.labels.push_back(1);
        break;
      }
      if (attempt > 16) throw GenerationError("could not produce a rejected session");
    }
  }
  return corpus;
}

std::vector<WindowPair> window_sequences(const SequenceCorpus& corpus, int h,
                                         bool pad_short) {
  if (h < 1) throw InputError("history length must be >= 1");
  const int pad_token = corpus.vocab;  // reserved start token
  std::vector<WindowPair> pairs;
  for (std::size_t s = 0; s < corpus.sessions.size(); ++s) {
    const auto& session = corpus.sessions[s];
    const auto len = static_cast<int>(session.size());
    if (len >= h + 1) {
      for (int t = h; t < len; ++t) {
        WindowPair p;
        p.history.assign(session.begin() + (t - h), session.begin() + t);
        p.next = session[t];
        p.session = s;
        pairs.push_back(std::move(p));
      }
    } else if (pad_short && len >= 1) {
      WindowPair p;
      p.history.assign(static_cast<std::size_t>(h), pad_token);
      for (int i = 0; i + 1 < len; ++i) p.history[h - (len - 1) + i] = session[i];
      p.next = session[len - 1];
      p.session = s;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

SequenceCorpus load_sequences(const std::string& sessions_path,
                              const std::string& labels_path) {
  std::ifstream is(sessions_path);
  if (!is) throw FormatError("cannot open '" + sessions_path + "'");
  SequenceCorpus corpus;
  std::string line;
  int max_token = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<int> session;
    long long tok;
    while (ls >> tok) {
      if (tok < 0) throw FormatError("negative token id in '" + sessions_path + "'");
      session.push_back(static_cast<int>(tok));
      max_token = std::max(max_token, static_cast<int>(tok));
    }
    if (!session.empty()) corpus.sessions.push_back(std::move(session));
  }
  corpus.vocab = max_token + 1;
  corpus.labels.assign(corpus.sessions.size(), 0);

  if (!labels_path.empty()) {
    std::ifstream ls(labels_path);
    if (!ls) throw FormatError("cannot open '" + labels_path + "'");
    std::size_t i = 0;
    int v;
    while (ls >> v) {
      if (i >= corpus.labels.size())
        throw FormatError("more labels than sessions in '" + labels_path + "'");
      if (v != 0 && v != 1) throw FormatError("labels must be 0 or 1");
      corpus.labels[i++] = static_cast<std::uint8_t>(v);
    }
    if (i != corpus.labels.size())
      throw FormatError("fewer labels than sessions in '" + labels_path + "'");
  }
  return corpus;
}

void write_sequences(const SequenceCorpus& corpus, const std::string& sessions_path,
                     const std::string& labels_path) {
  std::ofstream os(sessions_path);
  if (!os) throw FormatError("cannot open '" + sessions_path + "' for writing");
  for (const auto& session : corpus.sessions) {
    for (std::size_t i = 0; i < session.size(); ++i) {
      if (i) os << ' ';
      os << session[i];
    }
    os << '\n';
  }
  if (!labels_path.empty()) {
    std::ofstream ls(labels_path);
    if (!ls) throw FormatError("cannot open '" + labels_path + "' for writing");
    for (auto l : corpus.labels) ls << static_cast<int>(l) << '\n';
  }
}

}  // namespace dpad::data
