#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "roughkit/paths.hpp"

namespace roughkit {

/// Letters are 1..d; the empty word is the unit of the shuffle product.
using Word = std::vector<int>;

std::string word_to_string(const Word& w);
/// Parses a digit string, or "e" for the empty word.
Word word_from_string(const std::string& s);

/// Index of a word inside its level: base-d big-endian with digits (letter - 1).
std::size_t word_index(const Word& w, std::size_t dim);
Word word_at(std::size_t index, std::size_t length, std::size_t dim);

/// Element of T^N(R^d), stored densely level by level.
class TruncatedTensor {
 public:
  TruncatedTensor() = default;
  /// Zero tensor.
  TruncatedTensor(std::size_t dim, std::size_t level);

  static TruncatedTensor unit(std::size_t dim, std::size_t level);
  static TruncatedTensor from_levels(std::size_t dim, std::vector<std::vector<double>> levels);
  /// exp(v) = sum_k v^{(x)k} / k!, the signature of a straight segment with increment v.
  static TruncatedTensor exp_of_vector(const Vector& v, std::size_t level);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t level() const noexcept { return levels_.size() - 1; }

  /// Level-n coefficients (d^n reals). Throws ArgumentError when n > level().
  const std::vector<double>& project(std::size_t n) const;
  std::vector<double>& mutable_level(std::size_t n);
  const std::vector<std::vector<double>>& levels() const noexcept { return levels_; }

  double scalar() const { return levels_.front().front(); }
  double coeff(const Word& w) const;

  TruncatedTensor& operator+=(const TruncatedTensor& other);
  TruncatedTensor& operator-=(const TruncatedTensor& other);
  TruncatedTensor& operator*=(double c);

 private:
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> levels_;
};

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b);
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b);
TruncatedTensor operator*(double c, TruncatedTensor a);

/// c_n = sum_k a_k (x) b_{n-k}, truncated at min(level a, level b).
TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b);

/// Inverse in T^N, solved level by level so that a (x) inverse(a) = 1.
TruncatedTensor tensor_inverse(const TruncatedTensor& a);

/// Levels 0..n of a; throws when n > level.
TruncatedTensor project_up_to(const TruncatedTensor& a, std::size_t n);

/// Largest absolute coefficient across all stored levels.
double linf_norm(const TruncatedTensor& a);
/// Largest absolute coefficient across levels 0..n.
double linf_norm_up_to(const TruncatedTensor& a, std::size_t n);

struct WordOrder {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

/// Finite linear combination of words; zero coefficients are never stored.
class LinearFunctional {
 public:
  using Terms = std::map<Word, double, WordOrder>;

  LinearFunctional() = default;
  static LinearFunctional word(const Word& w, double coeff = 1.0);
  static LinearFunctional constant(double c);

  /// Text form `3*123 + 1*e`. Coefficients use 17 significant digits.
  static LinearFunctional parse(const std::string& text);
  std::string to_string() const;

  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  double coeff(const Word& w) const;
  void add_term(const Word& w, double coeff);

  /// l . i: appends the letter to every word.
  LinearFunctional append_letter(int letter) const;
  /// Largest letter used (0 for the zero functional or the empty word alone).
  int max_letter() const;

  LinearFunctional& operator+=(const LinearFunctional& other);
  LinearFunctional& operator*=(double c);
  bool operator==(const LinearFunctional& other) const { return terms_ == other.terms_; }

 private:
  Terms terms_;
};

LinearFunctional operator+(LinearFunctional a, const LinearFunctional& b);
LinearFunctional operator-(LinearFunctional a, const LinearFunctional& b);
LinearFunctional operator*(double c, LinearFunctional a);

/// Maximal word length; 0 for the zero functional.
std::size_t word_degree(const LinearFunctional& l);
double l1_norm(const LinearFunctional& l);

LinearFunctional shuffle(const Word& w, const Word& v);
/// Bilinear shuffle. Products whose degree exceeds max_degree are dropped.
LinearFunctional shuffle_functional(const LinearFunctional& l1, const LinearFunctional& l2,
                                    std::size_t max_degree = SIZE_MAX);
/// lambda_0 e + lambda_1 l + ... + lambda_n l^{sh n}.
LinearFunctional shuffle_polynomial(const std::vector<double>& coeffs, const LinearFunctional& l);

/// <l, a>. Throws ArgumentError when a word is longer than a.level() or uses a letter > a.dim().
double pair(const LinearFunctional& l, const TruncatedTensor& a);

/// exp(a_0) * sum_r l~^{sh r} / r!, all words longer than n dropped.
LinearFunctional exp_shuffle(const LinearFunctional& l, std::size_t n);

/// Randomised shuffle-identity test on word pairs with total degree <= level.
bool is_group_like(const TruncatedTensor& a, std::size_t trials, double tol, std::uint64_t seed = 0);

}  // namespace roughkit
