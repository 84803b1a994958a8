#ifndef AMORT_RESOURCE_HPP
#define AMORT_RESOURCE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace amort {

using Rational = boost::multiprecision::cpp_rational;

/// Parses `17`, `-3` or `p/q` (q > 0). Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// `p` when the denominator is 1, otherwise `p/q`.
std::string to_string(const Rational& r);

bool is_integral(const Rational& r);

/// A single kind of consumable resource: the monoid (Q>=0, <=, +, 0).
class ResourceValue {
public:
  ResourceValue() = default;
  explicit ResourceValue(Rational amount);
  ResourceValue(std::int64_t amount) : ResourceValue(Rational(amount)) {}

  const Rational& amount() const { return amount_; }

  static ResourceValue unit() { return {}; }

  friend bool operator==(const ResourceValue&, const ResourceValue&) = default;

private:
  Rational amount_{0};
};

ResourceValue combine(const ResourceValue& a, const ResourceValue& b);
bool leq(const ResourceValue& a, const ResourceValue& b);

/// Names a resource by an integer; negative integers name nothing.
ResourceValue res_of_int(std::int64_t z);

std::string to_string(const ResourceValue& r);

/// Assignment of annotation metavariables to amounts.
using Valuation = std::map<std::string, Rational>;

class UnboundMetavariable : public std::runtime_error {
public:
  explicit UnboundMetavariable(std::string name);
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

/// Linear expression `constant + sum(coeff * $var)` over annotation
/// metavariables. Source-level expressions are nonnegative; the prover forms
/// signed differences while threading the resource context.
class LinearExpr {
public:
  LinearExpr() = default;
  LinearExpr(Rational constant) : constant_(std::move(constant)) {}
  LinearExpr(std::int64_t constant) : constant_(constant) {}

  static LinearExpr var(const std::string& name, Rational coeff = 1);

  const Rational& constant() const { return constant_; }
  const std::map<std::string, Rational>& terms() const { return terms_; }
  Rational coeff(const std::string& name) const;

  bool is_constant() const { return terms_.empty(); }
  bool is_zero() const { return terms_.empty() && constant_ == 0; }
  bool is_nonnegative_form() const;
  std::set<std::string> metavariables() const;

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(const Rational& k);

  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator*(LinearExpr a, const Rational& k) { return a *= k; }
  friend bool operator==(const LinearExpr&, const LinearExpr&) = default;
  friend bool operator<(const LinearExpr& a, const LinearExpr& b);

  /// Signed value under `v`; throws UnboundMetavariable.
  Rational evaluate(const Valuation& v) const;

private:
  void add_term(const std::string& name, const Rational& coeff);

  Rational constant_{0};
  std::map<std::string, Rational> terms_;
};

using ResourceExpr = LinearExpr;

/// Evaluates a nonnegative expression to a resource amount.
ResourceValue expr_eval(const ResourceExpr& e, const Valuation& v);

/// `2*$a + 1/2`; zero prints as `0`.
std::string to_string(const LinearExpr& e);

}  // namespace amort

#endif
