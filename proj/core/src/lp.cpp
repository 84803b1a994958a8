#include "amort/lp.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

namespace amort {

std::vector<std::string> LpProblem::all_variables() const {
  std::vector<std::string> out = variables;
  std::set<std::string> seen(variables.begin(), variables.end());
  std::set<std::string> extra;
  for (const auto& c : constraints) {
    for (const auto& [v, _] : c.coeffs) {
      if (!seen.count(v)) extra.insert(v);
    }
  }
  for (const auto& o : objectives) {
    for (const auto& [v, _] : o) {
      if (!seen.count(v)) extra.insert(v);
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

LpConstraint normalise(const Constraint& c) {
  LinearExpr d = c.difference();
  LpConstraint out;
  for (const auto& [v, k] : d.terms()) out.coeffs[v] = k;
  out.rhs = -d.constant();
  out.label = c.origin;
  return out;
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

bool satisfies(const LpConstraint& c, const Valuation& v) {
  Rational sum = 0;
  for (const auto& [name, k] : c.coeffs) {
    auto it = v.find(name);
    if (it != v.end()) sum += k * it->second;
  }
  return sum >= c.rhs;
}

namespace {

using Row = std::vector<Rational>;

class Tableau {
public:
  // rows: a.y >= b rewritten as equalities with slack and artificial columns
  Tableau(const std::vector<LpConstraint>& cons, const std::vector<std::string>& vars) : n_(vars.size()) {
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < vars.size(); ++j) index[vars[j]] = j;
    m_ = cons.size();
    std::size_t artificials = 0;
    for (const auto& c : cons) {
      if (c.rhs > 0) ++artificials;
    }
    width_ = n_ + m_ + artificials;
    first_art_ = n_ + m_;
    std::size_t next_art = first_art_;
    for (std::size_t i = 0; i < m_; ++i) {
      Row r(width_ + 1);
      for (const auto& [v, k] : cons[i].coeffs) r[index.at(v)] = k;
      r[n_ + i] = -1;
      r[width_] = cons[i].rhs;
      if (cons[i].rhs > 0) {
        r[next_art] = 1;
        basis_.push_back(next_art++);
      } else {
        for (auto& x : r) x = -x;
        basis_.push_back(n_ + i);
      }
      rows_.push_back(std::move(r));
    }
    banned_.assign(width_, false);
  }

  /// false if infeasible
  bool phase_one() {
    Row cost(width_ + 1);
    for (std::size_t j = first_art_; j < width_; ++j) cost[j] = 1;
    price_out(cost);
    run(cost);
    if (cost[width_] != 0) return false;
    // pivot remaining zero-level artificials out, dropping redundant rows
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < first_art_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_art_ && !col; ++j) {
        if (rows_[i][j] != 0) col = j;
      }
      if (col) {
        Row dummy(width_ + 1);
        pivot(i, *col, dummy);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    for (std::size_t j = first_art_; j < width_; ++j) banned_[j] = true;
    return true;
  }

  /// Minimises c.y over the current face; false if unbounded. Columns with
  /// positive reduced cost at the optimum are then frozen so later
  /// objectives cannot disturb this one.
  bool optimise(const std::vector<Rational>& c) {
    Row cost(width_ + 1);
    for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
    price_out(cost);
    if (!run(cost)) return false;
    for (std::size_t j = 0; j < width_; ++j) {
      if (cost[j] > 0) banned_[j] = true;
    }
    return true;
  }

  std::vector<Rational> point() const {
    std::vector<Rational> y(n_);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < n_) y[basis_[i]] = rows_[i][width_];
    }
    return y;
  }

private:
  void price_out(Row& cost) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Rational k = cost[basis_[i]];
      if (k == 0) continue;
      for (std::size_t j = 0; j <= width_; ++j) {
        if (rows_[i][j] != 0) cost[j] -= k * rows_[i][j];
      }
    }
  }

  void pivot(std::size_t r, std::size_t col, Row& cost) {
    Rational p = rows_[r][col];
    for (auto& x : rows_[r]) {
      if (x != 0) x /= p;
    }
    const Row& pr = rows_[r];
    auto eliminate = [&](Row& row) {
      Rational k = row[col];
      if (k == 0) return;
      for (std::size_t j = 0; j <= width_; ++j) {
        if (pr[j] != 0) row[j] -= k * pr[j];
      }
    };
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i != r) eliminate(rows_[i]);
    }
    eliminate(cost);
    basis_[r] = col;
  }

  // Bland's rule: lowest-index entering column, lowest-index leaving basic.
  bool run(Row& cost) {
    while (true) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < width_; ++j) {
        if (!banned_[j] && cost[j] < 0) {
          enter = j;
          break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const Rational& a = rows_[i][*enter];
        if (a <= 0) continue;
        Rational ratio = rows_[i][width_] / a;
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter, cost);
    }
  }

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t width_ = 0;
  std::size_t first_art_ = 0;
  std::vector<Row> rows_;
  std::vector<std::size_t> basis_;
  std::vector<bool> banned_;
};

bool constant_constraint(const LpConstraint& c) {
  return std::all_of(c.coeffs.begin(), c.coeffs.end(), [](const auto& kv) { return kv.second == 0; });
}

bool same_row(const LpConstraint& a, const LpConstraint& b) {
  if (a.rhs != b.rhs) return false;
  auto nz = [](const LpConstraint& c) {
    std::map<std::string, Rational> out;
    for (const auto& [v, k] : c.coeffs) {
      if (k != 0) out[v] = k;
    }
    return out;
  };
  return nz(a) == nz(b);
}

struct Core {
  std::vector<std::string> vars;
  std::vector<LpConstraint> rows;
  std::vector<std::size_t> origin;  // index into the input
  std::optional<std::size_t> false_constant;
};

Core preprocess(const LpProblem& p) {
  Core c;
  c.vars = p.all_variables();
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const LpConstraint& k = p.constraints[i];
    if (constant_constraint(k)) {
      if (k.rhs > 0 && !c.false_constant) c.false_constant = i;
      continue;
    }
    bool dup = std::any_of(c.rows.begin(), c.rows.end(), [&](const LpConstraint& r) { return same_row(r, k); });
    if (dup) continue;
    c.rows.push_back(k);
    c.origin.push_back(i);
  }
  return c;
}

bool feasible(const std::vector<LpConstraint>& rows, const std::vector<std::string>& vars) {
  Tableau t(rows, vars);
  return t.phase_one();
}

}  // namespace

LpSolution solve(const LpProblem& p) {
  LpSolution out;
  Core core = preprocess(p);
  if (core.false_constant) {
    out.status = LpStatus::Infeasible;
    out.infeasible_core = {*core.false_constant};
    return out;
  }
  Tableau t(core.rows, core.vars);
  if (!t.phase_one()) {
    out.status = LpStatus::Infeasible;
    // deletion filter
    std::vector<std::size_t> keep(core.rows.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    for (std::size_t i = 0; i < keep.size();) {
      std::vector<LpConstraint> trial;
      for (std::size_t j = 0; j < keep.size(); ++j) {
        if (j != i) trial.push_back(core.rows[keep[j]]);
      }
      if (!feasible(trial, core.vars)) {
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
    for (std::size_t k : keep) out.infeasible_core.push_back(core.origin[k]);
    return out;
  }
  for (std::size_t o = 0; o < p.objectives.size(); ++o) {
    std::vector<Rational> c(core.vars.size());
    for (std::size_t j = 0; j < core.vars.size(); ++j) {
      auto it = p.objectives[o].find(core.vars[j]);
      if (it != p.objectives[o].end()) c[j] = it->second;
    }
    if (!t.optimise(c)) {
      out.status = LpStatus::Unbounded;
      return out;
    }
  }
  auto y = t.point();
  out.status = LpStatus::Optimal;
  for (std::size_t j = 0; j < core.vars.size(); ++j) out.valuation[core.vars[j]] = y[j];
  if (!p.objectives.empty()) {
    for (const auto& [v, k] : p.objectives.front()) out.objective += k * out.valuation[v];
  }
  return out;
}

namespace {

// Solves the square system A y = b; nullopt if singular.
std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col] == 0) continue;
      Rational k = a[i][col] / a[col][col];
      for (std::size_t j = col; j < n; ++j) a[i][j] -= k * a[col][j];
      b[i] -= k * b[col];
    }
  }
  std::vector<Rational> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[i] / a[i][i];
  return y;
}

}  // namespace

LpSolution enumerate_vertices_oracle(const LpProblem& p) {
  auto vars = p.all_variables();
  if (vars.size() > 6 || p.constraints.size() > 12) throw LpSizeExceeded("oracle limited to 6 variables and 12 constraints");
  const std::size_t n = vars.size();
  // hyperplanes: constraints then the axes y_j = 0
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  for (const auto& c : p.constraints) {
    std::vector<Rational> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto it = c.coeffs.find(vars[j]);
      if (it != c.coeffs.end()) r[j] = it->second;
    }
    rows.push_back(std::move(r));
    rhs.push_back(c.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> r(n);
    r[j] = 1;
    rows.push_back(std::move(r));
    rhs.push_back(0);
  }
  auto feasible_point = [&](const std::vector<Rational>& y) {
    for (std::size_t j = 0; j < n; ++j) {
      if (y[j] < 0) return false;
    }
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j) s += rows[i][j] * y[j];
      if (s < rhs[i]) return false;
    }
    return true;
  };
  auto objective = [&](const std::vector<Rational>& y) {
    Rational s = 0;
    if (p.objectives.empty()) return s;
    for (std::size_t j = 0; j < n; ++j) {
      auto it = p.objectives.front().find(vars[j]);
      if (it != p.objectives.front().end()) s += it->second * y[j];
    }
    return s;
  };

  LpSolution out;
  std::optional<std::vector<Rational>> best;
  Rational best_obj;
  auto consider = [&](const std::vector<Rational>& y) {
    if (!feasible_point(y)) return;
    Rational o = objective(y);
    if (!best || o < best_obj) {
      best = y;
      best_obj = o;
    }
  };
  if (n == 0) {
    consider({});
  } else {
    std::vector<std::size_t> pick(n);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t k, std::size_t from) {
      if (k == n) {
        std::vector<std::vector<Rational>> a;
        std::vector<Rational> b;
        for (std::size_t i : pick) {
          a.push_back(rows[i]);
          b.push_back(rhs[i]);
        }
        if (auto y = solve_square(a, b)) consider(*y);
        return;
      }
      for (std::size_t i = from; i < rows.size(); ++i) {
        pick[k] = i;
        choose(k + 1, i + 1);
      }
    };
    choose(0, 0);
  }
  if (!best) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.objective = best_obj;
  for (std::size_t j = 0; j < n; ++j) out.valuation[vars[j]] = (*best)[j];
  return out;
}

namespace {

std::string linear(const std::map<std::string, Rational>& coeffs) {
  std::string s;
  for (const auto& [v, k] : coeffs) {
    if (k == 0) continue;
    bool neg = k < 0;
    Rational mag = neg ? Rational(-k) : k;
    if (s.empty()) {
      if (neg) s += "-";
    } else {
      s += neg ? " - " : " + ";
    }
    if (mag != 1) s += to_string(mag) + " ";
    s += v;
  }
  return s.empty() ? "0" : s;
}

}  // namespace

std::string lp_dump(const LpProblem& p) {
  std::string out;
  for (std::size_t o = 0; o < p.objectives.size(); ++o) {
    out += (o == 0 ? std::string("min") : "min" + std::to_string(o + 1)) + ": " + linear(p.objectives[o]) + ";\n";
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    out += "c" + std::to_string(i + 1) + ": " + linear(c.coeffs) + " >= " + to_string(c.rhs) + ";";
    if (!c.label.empty()) out += "  # " + c.label;
    out += "\n";
  }
  return out;
}

}  // namespace amort
