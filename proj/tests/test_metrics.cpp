#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "pmri/metrics.hpp"

using namespace pmri;
using namespace testing;

TEST_CASE("evaluation mask")
{
  auto ref = random_image(6, 5, 1);
  CHECK((make_mask(ref, 0.0) == (ref > 0.0)).all());
  CHECK(make_mask(RealImage::Constant(4, 4, 2.0), 0.5).all());
  RealImage imp = RealImage::Zero(5, 5);
  imp(2, 3) = 1.0;
  auto m = make_mask(imp, 0.5);
  CHECK(m.count() == 1);
  CHECK(m(2, 3));
  CHECK(!make_mask(RealImage::Zero(3, 3)).any());
  CHECK_THROWS_AS(make_mask(ref, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_mask(ref, -0.1), InvalidArgument);
}

TEST_CASE("nmse")
{
  auto ref = random_image(16, 12, 2, 0.2, 1.0);
  auto mask = make_mask(ref);
  CHECK(nmse(ref, ref, mask) == 0.0);
  CHECK(nmse(RealImage::Zero(16, 12), ref, mask) == 1.0);
  CHECK(nmse(2.0 * ref, ref, mask) == doctest::Approx(1.0).epsilon(1e-14));
  for (double a : {-1.0, 0.3, 1.7}) {
    CHECK(nmse(a * ref, ref, mask) == doctest::Approx((a - 1) * (a - 1)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nmse(ref, ref, BoolImage::Constant(16, 12, false)), UndefinedMetric);
  CHECK_THROWS_AS(nmse(ref, RealImage::Zero(16, 12), mask), UndefinedMetric);
  CHECK_THROWS_AS(nmse(RealImage::Zero(3, 3), ref, mask), DimensionError);
}

TEST_CASE("psnr")
{
  RealImage ref = RealImage::Constant(8, 8, 0.5);
  ref(3, 3) = 1.0;
  auto mask = make_mask(ref);
  CHECK(psnr(ref, ref, mask) == std::numeric_limits<double>::infinity());
  SUBCASE("RMSE 0.1 at peak 1 is 20 dB")
  {
    RealImage err = RealImage::Constant(8, 8, 0.1);
    CHECK(psnr(ref + err, ref, mask) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(ref - err / 10.0, ref, mask) == doctest::Approx(40.0).epsilon(1e-12));
  }
  SUBCASE("lower error means higher psnr")
  {
    auto noise = random_image(8, 8, 4, -0.1, 0.1);
    double prev_nmse = -1, prev_psnr = std::numeric_limits<double>::infinity();
    for (double s : {0.1, 0.5, 1.0, 2.0}) {
      double const n = nmse(ref + s * noise, ref, mask), p = psnr(ref + s * noise, ref, mask);
      CHECK(n > prev_nmse);
      CHECK(p < prev_psnr);
      prev_nmse = n;
      prev_psnr = p;
    }
  }
}

TEST_CASE("ssim")
{
  auto ref = random_image(32, 24, 5, 0.1, 1.0);
  auto mask = make_mask(ref);
  CHECK(ssim(ref, ref, mask) == 1.0);
  CHECK(ssim(ref + 5.0, ref, mask) < 1.0);
  SUBCASE("matches a brute-force implementation")
  {
    for (std::uint64_t seed = 0; seed < 5; seed++) {
      auto a = random_image(8, 8, 100 + seed), b = random_image(8, 8, 200 + seed);
      auto m = make_mask(b);
      CHECK(std::abs(ssim(a, b, m) - brute_force_ssim(a, b, m)) <= 1e-10);
    }
    auto a = random_image(20, 13, 7), b = random_image(20, 13, 8);
    auto m = make_mask(b, 0.3);
    CHECK(std::abs(ssim(a, b, m) - brute_force_ssim(a, b, m)) <= 1e-10);
  }
  SUBCASE("joint positive scaling")
  {
    auto other = random_image(32, 24, 6, 0.1, 1.0);
    CHECK(ssim(3.5 * other, 3.5 * ref, mask) == doctest::Approx(ssim(other, ref, mask)).epsilon(1e-12));
  }
  SUBCASE("bounded")
  {
    auto other = random_image(32, 24, 9);
    double const s = ssim(other, ref, mask);
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);
  }
  CHECK_THROWS_AS(ssim(RealImage::Ones(4, 4), RealImage::Ones(4, 4), BoolImage::Constant(4, 4, true)),
                  InvalidArgument);
}

TEST_CASE("metric report")
{
  auto ref = random_image(16, 16, 1, 0.1, 1.0);
  auto rec = ref + 0.01 * random_image(16, 16, 2);
  auto r = evaluate(rec, ref);
  CHECK(r.mask_fraction > 0.0);
  CHECK(r.mask_fraction <= 1.0);
  CHECK(MetricReport::parse(r.serialize()) == r);
  auto exact = evaluate(ref, ref);
  CHECK(exact.nmse == 0.0);
  CHECK(exact.ssim == 1.0);
  CHECK(std::isinf(exact.psnr));
  CHECK(MetricReport::parse(exact.serialize()) == exact);
  CHECK_THROWS_AS(evaluate(ref, RealImage::Zero(16, 16)), UndefinedMetric);
  CHECK_THROWS_AS(MetricReport::parse("nmse 1\nbogus 2\n"), InvalidArgument);
  CHECK_THROWS_AS(MetricReport::parse("nmse 1\n"), InvalidArgument);
}
