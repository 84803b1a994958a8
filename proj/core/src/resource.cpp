#include "amort/resource.hpp"

#include <sstream>
#include <tuple>

namespace amort {

namespace {

bool parse_integer(std::string_view text, boost::multiprecision::cpp_int& out) {
  if (text.empty()) return false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') i = 1;
  if (i == text.size()) return false;
  for (std::size_t j = i; j < text.size(); ++j) {
    if (text[j] < '0' || text[j] > '9') return false;
  }
  out = boost::multiprecision::cpp_int(std::string(text));
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  boost::multiprecision::cpp_int num, den{1};
  if (!parse_integer(text.substr(0, slash), num)) {
    throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
  }
  if (slash != std::string_view::npos) {
    auto rest = text.substr(slash + 1);
    if (rest.empty() || rest[0] == '-' || rest[0] == '+' || !parse_integer(rest, den)) {
      throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
    }
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  }
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  if (is_integral(r)) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

bool is_integral(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

ResourceValue::ResourceValue(Rational amount) : amount_(std::move(amount)) {
  if (amount_ < 0) throw std::invalid_argument("negative resource amount " + to_string(amount_));
}

ResourceValue combine(const ResourceValue& a, const ResourceValue& b) {
  return ResourceValue(a.amount() + b.amount());
}

bool leq(const ResourceValue& a, const ResourceValue& b) { return a.amount() <= b.amount(); }

ResourceValue res_of_int(std::int64_t z) { return ResourceValue(z > 0 ? z : 0); }

std::string to_string(const ResourceValue& r) { return to_string(r.amount()); }

UnboundMetavariable::UnboundMetavariable(std::string name)
    : std::runtime_error("unbound metavariable $" + name), name_(std::move(name)) {}

LinearExpr LinearExpr::var(const std::string& name, Rational coeff) {
  LinearExpr e;
  e.add_term(name, coeff);
  return e;
}

Rational LinearExpr::coeff(const std::string& name) const {
  auto it = terms_.find(name);
  return it == terms_.end() ? Rational(0) : it->second;
}

bool LinearExpr::is_nonnegative_form() const {
  if (constant_ < 0) return false;
  for (const auto& [_, c] : terms_) {
    if (c < 0) return false;
  }
  return true;
}

std::set<std::string> LinearExpr::metavariables() const {
  std::set<std::string> out;
  for (const auto& [name, _] : terms_) out.insert(name);
  return out;
}

void LinearExpr::add_term(const std::string& name, const Rational& coeff) {
  if (coeff == 0) return;
  auto [it, inserted] = terms_.try_emplace(name, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  constant_ += other.constant_;
  for (const auto& [name, c] : other.terms_) add_term(name, c);
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  constant_ -= other.constant_;
  for (const auto& [name, c] : other.terms_) add_term(name, -c);
  return *this;
}

LinearExpr& LinearExpr::operator*=(const Rational& k) {
  if (k == 0) {
    constant_ = 0;
    terms_.clear();
    return *this;
  }
  constant_ *= k;
  for (auto& [_, c] : terms_) c *= k;
  return *this;
}

bool operator<(const LinearExpr& a, const LinearExpr& b) {
  return std::tie(a.constant_, a.terms_) < std::tie(b.constant_, b.terms_);
}

Rational LinearExpr::evaluate(const Valuation& v) const {
  Rational total = constant_;
  for (const auto& [name, c] : terms_) {
    auto it = v.find(name);
    if (it == v.end()) throw UnboundMetavariable(name);
    total += c * it->second;
  }
  return total;
}

ResourceValue expr_eval(const ResourceExpr& e, const Valuation& v) {
  return ResourceValue(e.evaluate(v));
}

std::string to_string(const LinearExpr& e) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, c] : e.terms()) {
    Rational mag = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    if (mag != 1) out << to_string(mag) << "*";
    out << "$" << name;
    first = false;
  }
  if (first) return to_string(e.constant());
  if (e.constant() != 0) {
    out << (e.constant() < 0 ? " - " : " + ") << to_string(e.constant() < 0 ? Rational(-e.constant()) : e.constant());
  }
  return out.str();
}

}  // namespace amort
