#include "roughkit/tensor_algebra.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <random>

#include "roughkit/errors.hpp"
#include "roughkit/path_io.hpp"

namespace roughkit {

std::string word_to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int letter : w) {
    if (letter < 1 || letter > 9) throw ArgumentError("text form supports letters 1..9 only");
    s.push_back(static_cast<char>('0' + letter));
  }
  return s;
}

Word word_from_string(const std::string& s) {
  if (s == "e") return {};
  if (s.empty()) throw ParseError("empty word");
  Word w;
  for (char ch : s) {
    if (ch < '1' || ch > '9') throw ParseError(std::string("bad letter '") + ch + "' in word " + s);
    w.push_back(ch - '0');
  }
  return w;
}

std::size_t word_index(const Word& w, std::size_t dim) {
  std::size_t idx = 0;
  for (int letter : w) {
    if (letter < 1 || static_cast<std::size_t>(letter) > dim)
      throw ArgumentError("letter " + std::to_string(letter) + " outside alphabet 1.." + std::to_string(dim));
    idx = idx * dim + static_cast<std::size_t>(letter - 1);
  }
  return idx;
}

Word word_at(std::size_t index, std::size_t length, std::size_t dim) {
  Word w(length);
  for (std::size_t k = length; k-- > 0;) {
    w[k] = static_cast<int>(index % dim) + 1;
    index /= dim;
  }
  return w;
}

namespace {

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= base;
  return r;
}

void require_same_shape(const TruncatedTensor& a, const TruncatedTensor& b) {
  if (a.dim() != b.dim() || a.level() != b.level()) throw ArgumentError("tensor shapes differ");
}

}  // namespace

TruncatedTensor::TruncatedTensor(std::size_t dim, std::size_t level) : dim_(dim) {
  if (dim == 0) throw ArgumentError("tensor dimension must be positive");
  levels_.resize(level + 1);
  for (std::size_t n = 0; n <= level; ++n) levels_[n].assign(ipow(dim, n), 0.0);
}

TruncatedTensor TruncatedTensor::unit(std::size_t dim, std::size_t level) {
  TruncatedTensor t(dim, level);
  t.levels_[0][0] = 1.0;
  return t;
}

TruncatedTensor TruncatedTensor::from_levels(std::size_t dim, std::vector<std::vector<double>> levels) {
  if (levels.empty()) throw ArgumentError("at least level 0 required");
  TruncatedTensor t(dim, levels.size() - 1);
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (levels[n].size() != t.levels_[n].size())
      throw ArgumentError("level " + std::to_string(n) + " must hold " + std::to_string(t.levels_[n].size()) +
                          " coefficients");
    t.levels_[n] = std::move(levels[n]);
  }
  return t;
}

TruncatedTensor TruncatedTensor::exp_of_vector(const Vector& v, std::size_t level) {
  std::size_t d = static_cast<std::size_t>(v.size());
  TruncatedTensor t = unit(d, level);
  for (std::size_t n = 1; n <= level; ++n) {
    const auto& prev = t.levels_[n - 1];
    auto& cur = t.levels_[n];
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < prev.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) cur[i * d + j] = prev[i] * v[static_cast<Eigen::Index>(j)] * inv_n;
  }
  return t;
}

const std::vector<double>& TruncatedTensor::project(std::size_t n) const {
  if (n >= levels_.size())
    throw ArgumentError("level " + std::to_string(n) + " exceeds truncation " + std::to_string(level()));
  return levels_[n];
}

std::vector<double>& TruncatedTensor::mutable_level(std::size_t n) {
  if (n >= levels_.size())
    throw ArgumentError("level " + std::to_string(n) + " exceeds truncation " + std::to_string(level()));
  return levels_[n];
}

double TruncatedTensor::coeff(const Word& w) const { return project(w.size())[word_index(w, dim_)]; }

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& other) {
  require_same_shape(*this, other);
  for (std::size_t n = 0; n < levels_.size(); ++n)
    for (std::size_t i = 0; i < levels_[n].size(); ++i) levels_[n][i] += other.levels_[n][i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& other) {
  require_same_shape(*this, other);
  for (std::size_t n = 0; n < levels_.size(); ++n)
    for (std::size_t i = 0; i < levels_[n].size(); ++i) levels_[n][i] -= other.levels_[n][i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double c) {
  for (auto& lvl : levels_)
    for (double& x : lvl) x *= c;
  return *this;
}

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
TruncatedTensor operator*(double c, TruncatedTensor a) { return a *= c; }

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
  if (a.dim() != b.dim()) throw ArgumentError("tensor_mul: dimension mismatch");
  std::size_t d = a.dim();
  std::size_t top = std::min(a.level(), b.level());
  TruncatedTensor c(d, top);
  for (std::size_t n = 0; n <= top; ++n) {
    auto& out = c.mutable_level(n);
    for (std::size_t k = 0; k <= n; ++k) {
      const auto& ak = a.project(k);
      const auto& bk = b.project(n - k);
      std::size_t stride = bk.size();
      for (std::size_t i = 0; i < ak.size(); ++i) {
        double x = ak[i];
        if (x == 0.0) continue;
        double* dst = out.data() + i * stride;
        for (std::size_t j = 0; j < stride; ++j) dst[j] += x * bk[j];
      }
    }
  }
  return c;
}

TruncatedTensor tensor_inverse(const TruncatedTensor& a) {
  double a0 = a.scalar();
  if (a0 == 0.0) throw SingularityError("tensor_inverse: zero scalar part");
  std::size_t d = a.dim();
  TruncatedTensor b(d, a.level());
  b.mutable_level(0)[0] = 1.0 / a0;
  for (std::size_t n = 1; n <= a.level(); ++n) {
    auto& out = b.mutable_level(n);
    for (std::size_t k = 1; k <= n; ++k) {
      const auto& ak = a.project(k);
      const auto& bk = b.project(n - k);
      std::size_t stride = bk.size();
      for (std::size_t i = 0; i < ak.size(); ++i)
        for (std::size_t j = 0; j < stride; ++j) out[i * stride + j] -= ak[i] * bk[j];
    }
    for (double& x : out) x /= a0;
  }
  return b;
}

TruncatedTensor project_up_to(const TruncatedTensor& a, std::size_t n) {
  if (n > a.level()) throw ArgumentError("project_up_to: level exceeds truncation");
  std::vector<std::vector<double>> lv(a.levels().begin(), a.levels().begin() + static_cast<std::ptrdiff_t>(n + 1));
  return TruncatedTensor::from_levels(a.dim(), std::move(lv));
}

double linf_norm(const TruncatedTensor& a) { return linf_norm_up_to(a, a.level()); }

double linf_norm_up_to(const TruncatedTensor& a, std::size_t n) {
  double m = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    for (double x : a.project(k)) m = std::max(m, std::abs(x));
  return m;
}

LinearFunctional LinearFunctional::word(const Word& w, double coeff) {
  LinearFunctional l;
  l.add_term(w, coeff);
  return l;
}

LinearFunctional LinearFunctional::constant(double c) { return word({}, c); }

double LinearFunctional::coeff(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? 0.0 : it->second;
}

void LinearFunctional::add_term(const Word& w, double coeff) {
  for (int letter : w)
    if (letter < 1) throw ArgumentError("letters must be positive");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.emplace(w, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

LinearFunctional LinearFunctional::append_letter(int letter) const {
  LinearFunctional out;
  for (const auto& [w, c] : terms_) {
    Word longer = w;
    longer.push_back(letter);
    out.add_term(longer, c);
  }
  return out;
}

int LinearFunctional::max_letter() const {
  int m = 0;
  for (const auto& [w, c] : terms_)
    for (int letter : w) m = std::max(m, letter);
  return m;
}

LinearFunctional& LinearFunctional::operator+=(const LinearFunctional& other) {
  for (const auto& [w, c] : other.terms_) add_term(w, c);
  return *this;
}

LinearFunctional& LinearFunctional::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, x] : terms_) x *= c;
  return *this;
}

LinearFunctional operator+(LinearFunctional a, const LinearFunctional& b) { return a += b; }
LinearFunctional operator-(LinearFunctional a, const LinearFunctional& b) { return a += (-1.0) * b; }
LinearFunctional operator*(double c, LinearFunctional a) { return a *= c; }

std::string LinearFunctional::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [w, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += format_double(c) + "*" + word_to_string(w);
  }
  return s;
}

LinearFunctional LinearFunctional::parse(const std::string& text) {
  LinearFunctional l;
  const char* p = text.c_str();
  auto skip = [&] {
    while (*p && std::isspace(static_cast<unsigned char>(*p))) ++p;
  };
  auto first = text.find_first_not_of(" \t\r\n");
  auto last = text.find_last_not_of(" \t\r\n");
  if (first != std::string::npos && text.substr(first, last - first + 1) == "0") return l;
  while (true) {
    skip();
    if (!*p) throw ParseError("expected a term in '" + text + "'");
    char* end = nullptr;
    double c = std::strtod(p, &end);
    if (end == p) throw ParseError("expected coefficient at '" + std::string(p) + "'");
    p = end;
    skip();
    if (*p != '*') throw ParseError("expected '*' after coefficient in '" + text + "'");
    ++p;
    skip();
    std::string token;
    while (*p && (std::isdigit(static_cast<unsigned char>(*p)) || *p == 'e')) token.push_back(*p++);
    l.add_term(word_from_string(token), c);
    skip();
    if (!*p) break;
    if (*p == '+') {
      ++p;
      continue;
    }
    if (*p == '-') continue;
    throw ParseError("unexpected character '" + std::string(1, *p) + "' in '" + text + "'");
  }
  return l;
}

std::size_t word_degree(const LinearFunctional& l) {
  return l.terms().empty() ? 0 : l.terms().rbegin()->first.size();
}

double l1_norm(const LinearFunctional& l) {
  double s = 0.0;
  for (const auto& [w, c] : l.terms()) s += std::abs(c);
  return s;
}

LinearFunctional shuffle(const Word& w, const Word& v) {
  // table[i][j] = w[0..i) sh v[0..j), filled by the last-letter recursion
  std::size_t m = w.size();
  std::size_t n = v.size();
  std::vector<std::vector<LinearFunctional>> table(m + 1, std::vector<LinearFunctional>(n + 1));
  table[0][0] = LinearFunctional::constant(1.0);
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      LinearFunctional cell;
      if (i > 0) cell += table[i - 1][j].append_letter(w[i - 1]);
      if (j > 0) cell += table[i][j - 1].append_letter(v[j - 1]);
      table[i][j] = std::move(cell);
    }
  return table[m][n];
}

LinearFunctional shuffle_functional(const LinearFunctional& l1, const LinearFunctional& l2, std::size_t max_degree) {
  LinearFunctional out;
  for (const auto& [w1, c1] : l1.terms())
    for (const auto& [w2, c2] : l2.terms()) {
      if (w1.size() + w2.size() > max_degree) continue;
      out += (c1 * c2) * shuffle(w1, w2);
    }
  return out;
}

LinearFunctional shuffle_polynomial(const std::vector<double>& coeffs, const LinearFunctional& l) {
  LinearFunctional out;
  LinearFunctional power = LinearFunctional::constant(1.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k > 0) power = shuffle_functional(power, l);
    out += coeffs[k] * power;
  }
  return out;
}

double pair(const LinearFunctional& l, const TruncatedTensor& a) {
  double s = 0.0;
  for (const auto& [w, c] : l.terms()) {
    if (w.size() > a.level())
      throw ArgumentError("pair: word " + word_to_string(w) + " has degree " + std::to_string(w.size()) +
                          " above truncation level " + std::to_string(a.level()));
    s += c * a.coeff(w);
  }
  return s;
}

LinearFunctional exp_shuffle(const LinearFunctional& l, std::size_t n) {
  double a0 = l.coeff({});
  LinearFunctional rest = l;
  rest.add_term({}, -a0);
  LinearFunctional sum = LinearFunctional::constant(1.0);
  LinearFunctional power = LinearFunctional::constant(1.0);
  // every word of rest has length >= 1, so powers beyond n vanish after truncation
  for (std::size_t r = 1; r <= n && !rest.is_zero(); ++r) {
    power = (1.0 / static_cast<double>(r)) * shuffle_functional(power, rest, n);
    if (power.is_zero()) break;
    sum += power;
  }
  return std::exp(a0) * sum;
}

bool is_group_like(const TruncatedTensor& a, std::size_t trials, double tol, std::uint64_t seed) {
  if (std::abs(a.scalar() - 1.0) > tol) return false;
  std::mt19937_64 rng(seed);
  std::size_t top = a.level();
  std::uniform_int_distribution<int> letter(1, static_cast<int>(a.dim()));
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::size_t total = std::uniform_int_distribution<std::size_t>(0, top)(rng);
    std::size_t len1 = std::uniform_int_distribution<std::size_t>(0, total)(rng);
    Word w1(len1);
    Word w2(total - len1);
    for (int& x : w1) x = letter(rng);
    for (int& x : w2) x = letter(rng);
    double lhs = pair(shuffle(w1, w2), a);
    double rhs = a.coeff(w1) * a.coeff(w2);
    if (std::abs(lhs - rhs) > tol) return false;
  }
  return true;
}

}  // namespace roughkit
