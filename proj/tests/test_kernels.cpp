#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "h2fed/kernels.hpp"
#include "h2fed/rng.hpp"

using namespace h2fed;
namespace k = h2fed::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// Active backends vs the scalar reference on the same inputs. Sizes cover
// all SIMD tail paths.
void check_equivalence(k::Backend b) {
  const k::KernelTable& ref = *k::table_for(k::Backend::Scalar);
  const k::KernelTable& alt = *k::table_for(b);
  Rng rng(mix_seed({42, static_cast<std::uint64_t>(b)}));

  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{7},
                        std::size_t{8}, std::size_t{40}, std::size_t{63}, std::size_t{784},
                        std::size_t{31810}}) {
    auto a = random_vec(rng, n);
    auto c = random_vec(rng, n);

    CHECK(alt.dot(a.data(), c.data(), n) ==
          doctest::Approx(ref.dot(a.data(), c.data(), n)).epsilon(1e-12));
    CHECK(alt.sq_dist(a.data(), c.data(), n) ==
          doctest::Approx(ref.sq_dist(a.data(), c.data(), n)).epsilon(1e-12));
    CHECK(alt.sum(a.data(), n) == doctest::Approx(ref.sum(a.data(), n)).epsilon(1e-12));

    auto y1 = c, y2 = c;
    ref.axpy(0.37, a.data(), y1.data(), n);
    alt.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    auto s1 = a, s2 = a;
    ref.scal(-1.7, s1.data(), n);
    alt.scal(-1.7, s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);

    auto r1 = a, r2 = a;
    ref.relu(r1.data(), n);
    alt.relu(r2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(r1[i] == r2[i]);

    auto g1 = c, g2 = c;
    ref.relu_backward(r1.data(), g1.data(), n);
    alt.relu_backward(r2.data(), g2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(g1[i] == g2[i]);

    CHECK(alt.all_finite(a.data(), n));
  }

  // Matrix shapes matching the model: 784x40 and 40x10 plus odd tails.
  for (auto [kk, nn] : {std::pair<std::size_t, std::size_t>{784, 40}, {40, 10}, {5, 3}, {3, 9}}) {
    auto m = random_vec(rng, kk * nn);
    auto x = random_vec(rng, kk);
    auto yv = random_vec(rng, nn);

    auto o1 = yv, o2 = yv;
    ref.gemv_t(m.data(), x.data(), o1.data(), kk, nn);
    alt.gemv_t(m.data(), x.data(), o2.data(), kk, nn);
    for (std::size_t i = 0; i < nn; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-12));

    auto p1 = x, p2 = x;
    ref.gemv_n(m.data(), yv.data(), p1.data(), kk, nn);
    alt.gemv_n(m.data(), yv.data(), p2.data(), kk, nn);
    for (std::size_t i = 0; i < kk; ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));

    auto m1 = m, m2 = m;
    ref.ger(m1.data(), x.data(), yv.data(), kk, nn);
    alt.ger(m2.data(), x.data(), yv.data(), kk, nn);
    for (std::size_t i = 0; i < kk * nn; ++i) CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-14));
  }
}

}  // namespace

TEST_CASE("every available backend matches the scalar reference") {
  for (k::Backend b : k::available_backends()) {
    CAPTURE(k::backend_name(b));
    check_equivalence(b);
  }
}

TEST_CASE("all_finite flags NaN and infinities in any lane position") {
  for (k::Backend b : k::available_backends()) {
    const k::KernelTable& t = *k::table_for(b);
    for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{13}}) {
      for (std::size_t bad = 0; bad < n; ++bad) {
        std::vector<double> v(n, 1.0);
        v[bad] = std::numeric_limits<double>::quiet_NaN();
        CHECK_FALSE(t.all_finite(v.data(), n));
        v[bad] = std::numeric_limits<double>::infinity();
        CHECK_FALSE(t.all_finite(v.data(), n));
        v[bad] = -std::numeric_limits<double>::infinity();
        CHECK_FALSE(t.all_finite(v.data(), n));
      }
    }
  }
}

TEST_CASE("scalar dot/axpy basics") {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(k::dot(a, b, 3) == 32.0);
  double y[] = {1.0, 1.0, 1.0};
  k::axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 5.0);
  CHECK(y[2] == 7.0);
  CHECK(k::sq_dist(a, b, 3) == 27.0);
}

TEST_CASE("backend override round-trips") {
  const k::Backend orig = k::active_backend();
  REQUIRE(k::set_backend(k::Backend::Scalar));
  CHECK(k::active_backend() == k::Backend::Scalar);
  REQUIRE(k::set_backend(orig));
}
