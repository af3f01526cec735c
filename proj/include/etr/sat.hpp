// A compact CDCL SAT solver: two watched literals, first-UIP clause learning,
// non-chronological backjumping, activity-ordered decisions with phase
// saving. Sized for the oracle's encodings (a few thousand clauses).
#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace etr {

class SatSolver {
 public:
  /// Literals are nonzero ints: +v / -v for variable v (1-based).
  int new_var() {
    values_.push_back(0);
    level_.push_back(0);
    reason_.push_back(-1);
    activity_.push_back(0.0);
    phase_.push_back(false);
    seen_.push_back(false);
    watches_.emplace_back();
    watches_.emplace_back();
    return num_vars();
  }
  int num_vars() const { return static_cast<int>(values_.size()) - 1; }

  void add_clause(std::vector<int> clause) {
    std::vector<int> c;
    for (int l : clause) {
      bool dup = false;
      for (int m : c) {
        if (m == l) dup = true;
        if (m == -l) return;  // tautology
      }
      if (!dup) c.push_back(l);
    }
    if (c.empty()) {
      trivially_unsat_ = true;
      return;
    }
    clauses_.push_back(std::move(c));
  }

  bool solve() {
    if (trivially_unsat_) return false;
    reset();
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      const auto& c = clauses_[i];
      if (c.size() == 1) {
        if (value(c[0]) < 0) return false;
        if (value(c[0]) == 0) assign(c[0], -1);
      } else {
        watch(i);
      }
    }
    if (propagate() >= 0) return false;

    while (true) {
      const int var = pick_branch();
      if (var == 0) return true;
      trail_lim_.push_back(trail_.size());
      assign(phase_[var] ? var : -var, -1);
      int conflict;
      while ((conflict = propagate()) >= 0) {
        if (trail_lim_.empty()) return false;
        int back = 0;
        std::vector<int> learnt = analyze(conflict, back);
        backjump(back);
        if (learnt.size() == 1) {
          assign(learnt[0], -1);
        } else {
          clauses_.push_back(learnt);
          const std::size_t idx = clauses_.size() - 1;
          watch(idx);
          assign(learnt[0], static_cast<int>(idx));
        }
        decay();
      }
    }
  }

  /// Value of variable v in the last satisfying assignment.
  bool model_value(int v) const { return values_[v] > 0; }

 private:
  static std::size_t index(int lit) { return static_cast<std::size_t>(2 * std::abs(lit) + (lit < 0 ? 1 : 0)); }
  int value(int lit) const {
    const int v = values_[std::abs(lit)];
    return lit > 0 ? v : -v;
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void reset() {
    std::fill(values_.begin(), values_.end(), 0);
    std::fill(reason_.begin(), reason_.end(), -1);
    for (auto& w : watches_) w.clear();
    trail_.clear();
    trail_lim_.clear();
    head_ = 0;
  }

  // watches_[index(l)] holds clauses that watch -l, visited when l becomes true
  void watch(std::size_t i) {
    watches_[index(-clauses_[i][0])].push_back(i);
    watches_[index(-clauses_[i][1])].push_back(i);
  }

  void assign(int lit, int reason) {
    const int v = std::abs(lit);
    values_[v] = lit > 0 ? 1 : -1;
    level_[v] = decision_level();
    reason_[v] = reason;
    phase_[v] = lit > 0;
    trail_.push_back(lit);
  }

  int propagate() {
    while (head_ < trail_.size()) {
      const int falsified = -trail_[head_++];
      auto& ws = watches_[index(-falsified)];
      for (std::size_t k = 0; k < ws.size();) {
        const std::size_t ci = ws[k];
        auto& c = clauses_[ci];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (value(c[0]) > 0) {
          ++k;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < c.size(); ++j)
          if (value(c[j]) >= 0) {
            std::swap(c[1], c[j]);
            watches_[index(-c[1])].push_back(ci);
            ws[k] = ws.back();
            ws.pop_back();
            moved = true;
            break;
          }
        if (moved) continue;
        if (value(c[0]) < 0) {
          head_ = trail_.size();
          return static_cast<int>(ci);
        }
        assign(c[0], static_cast<int>(ci));
        ++k;
      }
    }
    return -1;
  }

  std::vector<int> analyze(int conflict, int& back_level) {
    std::vector<int> learnt{0};
    int pending = 0;
    int lit = 0;
    std::size_t idx = trail_.size();
    int clause = conflict;
    do {
      for (int q : clauses_[clause]) {
        if (lit != 0 && q == lit) continue;
        const int v = std::abs(q);
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = true;
        bump(v);
        if (level_[v] == decision_level())
          ++pending;
        else
          learnt.push_back(q);
      }
      do lit = trail_[--idx];
      while (!seen_[std::abs(lit)]);
      clause = reason_[std::abs(lit)];
      seen_[std::abs(lit)] = false;
      --pending;
    } while (pending > 0);
    learnt[0] = -lit;

    back_level = 0;
    std::size_t max_i = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      seen_[std::abs(learnt[i])] = false;
      if (level_[std::abs(learnt[i])] > back_level) {
        back_level = level_[std::abs(learnt[i])];
        max_i = i;
      }
    }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[max_i]);
    return learnt;
  }

  void backjump(int level) {
    if (decision_level() <= level) return;
    const std::size_t keep = trail_lim_[level];
    while (trail_.size() > keep) {
      const int v = std::abs(trail_.back());
      values_[v] = 0;
      reason_[v] = -1;
      trail_.pop_back();
    }
    trail_lim_.resize(level);
    head_ = trail_.size();
  }

  int pick_branch() const {
    int best = 0;
    for (int v = 1; v <= num_vars(); ++v)
      if (values_[v] == 0 && (best == 0 || activity_[v] > activity_[best])) best = v;
    return best;
  }

  void bump(int v) {
    activity_[v] += inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      inc_ *= 1e-100;
    }
  }
  void decay() { inc_ /= 0.95; }

  std::vector<std::vector<int>> clauses_;
  std::vector<int8_t> values_{0};
  std::vector<int> level_{0};
  std::vector<int> reason_{-1};
  std::vector<double> activity_{0.0};
  std::vector<bool> phase_{false};
  std::vector<bool> seen_{false};
  std::vector<std::vector<std::size_t>> watches_{2};
  std::vector<int> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t head_ = 0;
  double inc_ = 1.0;
  bool trivially_unsat_ = false;
};

}  // namespace etr
