#include "spinstar/angular_momentum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <stdexcept>
#include <string>

namespace spinstar {

namespace {

void require_valid(HalfInt j, HalfInt m, const char* what) {
  if (j.twice() < 0) {
    throw std::invalid_argument(std::string("clebsch_gordan: negative magnitude ") + what + " = " + j.str());
  }
  if ((j.twice() - m.twice()) % 2 != 0) {
    throw std::invalid_argument(std::string("clebsch_gordan: projection parity does not match ") + what +
                                " = " + j.str() + " (m = " + m.str() + ")");
  }
}

// ln(2 cosh x) without overflow.
double log_two_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

LogFactorialTable::LogFactorialTable(std::size_t size) : table_(std::max<std::size_t>(size, 2)) {
  // long double running sum keeps the accumulated rounding below one ulp
  long double acc = 0.0L;
  table_[0] = 0.0;
  for (std::size_t n = 1; n < table_.size(); ++n) {
    acc += std::log(static_cast<long double>(n));
    table_[n] = static_cast<double>(acc);
  }
}

double LogFactorialTable::operator()(long n) const {
  if (n < 0 || static_cast<std::size_t>(n) >= table_.size()) {
    throw std::out_of_range("LogFactorialTable: n = " + std::to_string(n) + " outside table of size " +
                            std::to_string(table_.size()));
  }
  return table_[static_cast<std::size_t>(n)];
}

const LogFactorialTable& log_factorials() {
  static const LogFactorialTable table(8192);
  return table;
}

namespace {

// ln n! - ln(sqrt(2 pi n) (n/e)^n)
double stirlerr(double n) {
  constexpr double S0 = 1.0 / 12, S1 = 1.0 / 360, S2 = 1.0 / 1260, S3 = 1.0 / 1680, S4 = 1.0 / 1188;
  if (n <= 15.0) return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * std::log(2.0 * std::numbers::pi);
  const double nn = n * n;
  if (n > 500) return (S0 - S1 / nn) / n;
  if (n > 80) return (S0 - (S1 - S2 / nn) / nn) / n;
  if (n > 35) return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
  return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// x ln(x/np) + np - x without cancellation
double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace

double log_binomial(long n, long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  // saddle-point form of ln(C(n,k) 2^-n), accurate to a few ulp
  const double dn = static_cast<double>(n), dk = static_cast<double>(k), half = 0.5 * dn;
  const double lc = stirlerr(dn) - stirlerr(dk) - stirlerr(dn - dk) - bd0(dk, half) - bd0(dn - dk, half);
  const double lf = std::log(2.0 * std::numbers::pi) + std::log(dk) + std::log1p(-dk / dn);
  return lc - 0.5 * lf + dn * std::numbers::ln2;
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  require_valid(j1, m1, "j1");
  require_valid(j2, m2, "j2");
  require_valid(J, M, "J");

  if (M != m1 + m2) return 0.0;
  if (abs(m1) > j1 || abs(m2) > j2 || abs(M) > J) return 0.0;
  if (J < abs(j1 - j2) || J > j1 + j2) return 0.0;
  // Integer combinations; parity is guaranteed by the checks above.
  const long a = integer_gap(j1 + j2, J);   // j1 + j2 - J
  const long b = integer_gap(j1 - m1, HalfInt(0));
  const long c = integer_gap(j2 + m2, HalfInt(0));
  const long d = integer_gap(J - j2 + m1, HalfInt(0));
  const long e = integer_gap(J - j1 - m2, HalfInt(0));

  const auto& lf = log_factorials();
  const double log_prefactor =
      0.5 * (std::log(static_cast<double>(J.twice() + 1)) + lf(integer_gap(J + j1 - j2, HalfInt(0))) +
             lf(integer_gap(J - j1 + j2, HalfInt(0))) + lf(a) - lf(integer_gap(j1 + j2 + J, HalfInt(0)) + 1) +
             lf(integer_gap(J + M, HalfInt(0))) + lf(integer_gap(J - M, HalfInt(0))) +
             lf(integer_gap(j1 - m1, HalfInt(0))) + lf(integer_gap(j1 + m1, HalfInt(0))) +
             lf(integer_gap(j2 - m2, HalfInt(0))) + lf(integer_gap(j2 + m2, HalfInt(0))));

  const long k_min = std::max({0L, -d, -e});
  const long k_max = std::min({a, b, c});
  if (k_min > k_max) return 0.0;

  // Racah single sum, accumulated relative to the largest term.
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(k_max - k_min + 1));
  double log_max = -std::numeric_limits<double>::infinity();
  for (long k = k_min; k <= k_max; ++k) {
    const double lt = -(lf(k) + lf(a - k) + lf(b - k) + lf(c - k) + lf(d + k) + lf(e + k));
    logs.push_back(lt);
    log_max = std::max(log_max, lt);
  }
  double sum = 0.0;
  for (long k = k_min; k <= k_max; ++k) {
    const double term = std::exp(logs[static_cast<std::size_t>(k - k_min)] - log_max);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum * std::exp(log_prefactor + log_max);
}

HalfInt min_bath_spin(int N) { return HalfInt::from_twice(N % 2 == 0 ? 0 : 1); }

std::vector<HalfInt> bath_spins(int N) {
  if (N < 1) throw std::invalid_argument("bath_spins: N must be >= 1");
  std::vector<HalfInt> out;
  for (int twice = N % 2; twice <= N; twice += 2) out.push_back(HalfInt::from_twice(twice));
  return out;
}

double log_degeneracy(int N, HalfInt j) {
  if (N < 1) throw std::invalid_argument("degeneracy: N must be >= 1");
  if (j.twice() < 0 || (j.twice() - N) % 2 != 0) {
    throw std::invalid_argument("degeneracy: spin " + j.str() + " incompatible with N = " + std::to_string(N));
  }
  if (j.twice() > N) return -std::numeric_limits<double>::infinity();
  // C(N,k) - C(N,k+1) = C(N,k) (2j+1)/(N/2+j+1) with k = N/2 + j.
  const long k = (N + j.twice()) / 2;
  return log_binomial(N, k) + std::log(static_cast<double>(j.twice() + 1)) - std::log(static_cast<double>(k + 1));
}

double degeneracy(int N, HalfInt j) { return std::exp(log_degeneracy(N, j)); }

double log_partition_function(int N, double beta) {
  if (N < 1) throw std::invalid_argument("partition_function: N must be >= 1");
  return N * log_two_cosh(0.5 * beta);
}

double partition_function(int N, double beta) { return std::exp(log_partition_function(N, beta)); }

double log_sector_weight(int N, HalfInt j, HalfInt m, double beta) {
  if (!is_projection_of(j, m)) {
    throw std::invalid_argument("sector weight: m = " + m.str() + " is not a projection of j = " + j.str());
  }
  return log_degeneracy(N, j) - beta * m.value() - log_partition_function(N, beta);
}

}  // namespace spinstar

namespace spinstar {

HalfInt HalfInt::parse(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> HalfInt { throw std::invalid_argument("not a half-integer: '" + s + "'"); };
  if (s.empty()) return fail();
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      std::size_t used = 0;
      const int num = std::stoi(s.substr(0, slash), &used);
      if (used != slash || s.substr(slash + 1) != "2") return fail();
      return from_twice(num);
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return fail();
    const double twice = 2.0 * v;
    if (std::abs(twice - std::round(twice)) > 1e-12) return fail();
    return from_twice(static_cast<int>(std::lround(twice)));
  } catch (const std::logic_error&) {
    return fail();
  }
}

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

}  // namespace spinstar
