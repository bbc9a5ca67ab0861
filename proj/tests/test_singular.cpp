#include "doctest.h"
#include "oracles.hpp"

#include "psym/errors.hpp"
#include "psym/singular.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace psym;

namespace {

// Uniform doubles on a 2^-53 lattice in [0, 1), returned with their numerators.
std::vector<std::uint64_t> lattice_numerators(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint64_t> dist(0, (std::uint64_t{1} << 53) - 1);
    std::vector<std::uint64_t> out(n);
    for (auto& m : out) m = dist(gen);
    return out;
}

double lattice(std::uint64_t m) { return std::ldexp(static_cast<double>(m), -53); }

}  // namespace

TEST_CASE("cantor_eval at exact ternary points") {
    CHECK(cantor_eval(0.0) == 0.0);
    CHECK(cantor_eval(1.0) == 1.0);
    CHECK(cantor_eval(0.25) == 1.0 / 3.0);  // 0.0202..._3 -> 0.0101..._2
    CHECK(cantor_eval(0.75) == 2.0 / 3.0);
    CHECK(cantor_eval(0.5) == 0.5);         // 0.111..._3 -> first digit 1
}

TEST_CASE("cantor_eval of the exact rationals 1/3 and 2/3") {
    CHECK(cantor_eval(1, 3) == 0.5);
    CHECK(cantor_eval(2, 3) == 0.5);
    CHECK(cantor_eval(1, 9) == 0.25);
    CHECK(cantor_eval(7, 9) == 0.75);
    CHECK(cantor_eval(1, 4) == 1.0 / 3.0);
    CHECK(cantor_eval(0, 5) == 0.0);
    CHECK(cantor_eval(5, 5) == 1.0);
    CHECK_THROWS_AS(cantor_eval(6, 5), DomainError);
    // The double nearest 1/3 is not 1/3; its value sits next to the plateau.
    CHECK(cantor_eval(1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(cantor_eval(1.0 / 3.0) == oracle::cantor(1.0 / 3.0));
}

TEST_CASE("cantor_eval agrees with the digit oracle on random lattice points") {
    for (auto m : lattice_numerators(2000, 11)) {
        const double t = lattice(m);
        CHECK(cantor_eval(t) == oracle::cantor(t));
    }
}

TEST_CASE("cantor self-similarity and symmetry on random points") {
    const double tol = std::ldexp(1.0, -60);
    for (auto m : lattice_numerators(1000, 12)) {
        const double t = lattice(m);
        const double c = cantor_eval(t);
        // t/3 and (t+2)/3 as exact rationals m / (3 2^53), (m + 2^54) / (3 2^53).
        const std::uint64_t den = std::uint64_t{3} << 53;
        CHECK(std::abs(cantor_eval(m, den) - 0.5 * c) <= tol);
        CHECK(std::abs(cantor_eval(m + (std::uint64_t{1} << 54), den) - (0.5 + 0.5 * c)) <= 2 * tol);
        CHECK(std::abs(cantor_eval(1.0 - t) - (1.0 - c)) <= std::ldexp(1.0, -52));
    }
}

TEST_CASE("cantor_eval is nondecreasing") {
    auto ms = lattice_numerators(5000, 13);
    std::sort(ms.begin(), ms.end());
    double prev = 0.0;
    for (auto m : ms) {
        const double c = cantor_eval(lattice(m));
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("cantor_eval rejects arguments outside [0,1]") {
    CHECK_THROWS_AS(cantor_eval(-0.1), DomainError);
    CHECK_THROWS_AS(cantor_eval(1.5), DomainError);
    CHECK_THROWS_AS(cantor_eval(std::nan("")), DomainError);
}

TEST_CASE("staircase_extend is floor plus the Cantor function of the fraction") {
    CHECK(staircase_extend(0.0) == 0.0);
    CHECK(staircase_extend(1.0) == 1.0);
    CHECK(staircase_extend(2.25) == 2.0 + 1.0 / 3.0);
    CHECK(staircase_extend(3.75) == 3.0 + 2.0 / 3.0);
    CHECK_THROWS_AS(staircase_extend(-1.0), DomainError);
    for (auto m : lattice_numerators(200, 14)) {
        const double t = lattice(m);
        CHECK(staircase_extend(5.0 + t) == doctest::Approx(5.0 + cantor_eval(t)).epsilon(1e-15));
    }
}

TEST_CASE("minkowski_eval at rational and quadratic points") {
    CHECK(minkowski_eval(0.0) == 0.0);
    CHECK(minkowski_eval(1.0) == 1.0);
    CHECK(minkowski_eval(0.5) == 0.5);
    CHECK(minkowski_eval(0.25) == 0.125);                        // [0; 4]
    CHECK(minkowski_eval(0.375) == 0.3125);  // [0; 2, 1, 2] -> 2(1/4 - 1/8 + 1/32)
    CHECK(minkowski_eval(1.0 / 3.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(minkowski_eval(0.4) == doctest::Approx(0.375).epsilon(1e-12));
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;  // [0; 1, 1, 1, ...]
    CHECK(minkowski_eval(golden) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    const double silver = std::sqrt(2.0) - 1.0;  // [0; 2, 2, 2, ...] -> 2 sum (-1)^(k+1) 4^-k = 2/5
    CHECK(minkowski_eval(silver) == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("minkowski_eval symmetry and monotonicity") {
    auto ms = lattice_numerators(1000, 15);
    for (auto m : ms) {
        const double t = lattice(m);
        CHECK(std::abs(minkowski_eval(1.0 - t) - (1.0 - minkowski_eval(t))) <= 4e-16);
    }
    std::sort(ms.begin(), ms.end());
    double prev = 0.0;
    for (auto m : ms) {
        const double v = minkowski_eval(lattice(m));
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("StaircaseFunction parse, names and domains") {
    CHECK(StaircaseFunction::parse("cantor").name() == "cantor");
    CHECK(StaircaseFunction::parse("minkowski").name() == "minkowski");
    const auto a = StaircaseFunction::parse("affine+cantor:1,1");
    CHECK(a.name() == "affine+cantor:1,1");
    CHECK(a(0.25) == doctest::Approx(0.25 + 1.0 / 3.0));
    CHECK(a(2.25) == doctest::Approx(2.25 + 2.0 + 1.0 / 3.0));
    CHECK(StaircaseFunction::parse(a.name()).name() == a.name());
    CHECK_THROWS_AS(StaircaseFunction::parse("devil"), ValidationError);
    CHECK_THROWS_AS(StaircaseFunction::parse("affine+cantor:-1,1"), ValidationError);
    CHECK(std::isinf(StaircaseFunction::cantor().domain().hi));
    CHECK_THROWS_AS(StaircaseFunction::cantor()(-0.5), DomainError);
}

TEST_CASE("sampled staircase interpolates and validates") {
    const auto f = StaircaseFunction::sampled({0.0, 1.0, 2.0}, {0.0, 0.5, 2.0});
    CHECK(f(0.5) == doctest::Approx(0.25));
    CHECK(f(1.5) == doctest::Approx(1.25));
    CHECK(f(2.0) == 2.0);
    CHECK_THROWS_AS(f(2.5), DomainError);
    CHECK_THROWS_AS(StaircaseFunction::sampled({0.0, 0.0}, {0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(StaircaseFunction::sampled({0.0, 1.0}, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(StaircaseFunction::sampled({0.0}, {0.0}), ValidationError);
}

TEST_CASE("sampled staircase from CSV with a header") {
    const auto path = std::filesystem::temp_directory_path() / "psym_staircase_test.csv";
    {
        std::ofstream out(path);
        out << "t,value\n0,0\n0.5,0.25\n1,1\n";
    }
    const auto f = StaircaseFunction::from_csv(path);
    CHECK(f.domain().lo == 0.0);
    CHECK(f.domain().hi == 1.0);
    CHECK(f(0.75) == doctest::Approx(0.625));
    {
        std::ofstream out(path);
        out << "0,0\n1,x\n";
    }
    CHECK_THROWS_AS(StaircaseFunction::from_csv(path), ValidationError);
    std::filesystem::remove(path);
}

TEST_CASE("dini quotients of the Cantor function at 0 match the digit oracle") {
    const auto f = StaircaseFunction::cantor();
    const auto steps = default_dini_schedule();
    const auto est = dini(f, 0.0, DiniSide::right, DiniEnvelope::upper, steps);
    REQUIRE(est.quotients.size() == 12);
    for (std::size_t n = 0; n < est.quotients.size(); ++n) {
        const double h = est.quotients[n].h;
        CHECK(h == steps[n]);
        CHECK(est.quotients[n].quotient == oracle::cantor(h) / h);
        CHECK(est.quotients[n].quotient == doctest::Approx(std::pow(1.5, static_cast<double>(n + 1))).epsilon(1e-9));
    }
    CHECK(est.verdict.kind == DiniVerdict::Kind::diverging);
}

TEST_CASE("dini on a smooth point is finite") {
    const auto f = StaircaseFunction::affine_plus_cantor(2.0, 0.0);
    const auto est = dini(f, 0.6, DiniSide::left, DiniEnvelope::lower, default_dini_schedule());
    CHECK(est.verdict.kind == DiniVerdict::Kind::finite);
    CHECK(est.verdict.value == doctest::Approx(2.0).epsilon(1e-9));
    for (const auto& q : est.quotients) CHECK(q.h < 0.0);
}

TEST_CASE("dini inside a Cantor plateau is finite and zero") {
    const auto est = dini(StaircaseFunction::cantor(), 0.5, DiniSide::right, DiniEnvelope::upper,
                          geometric_schedule(0.1, 0.5, 10));
    CHECK(est.verdict.kind == DiniVerdict::Kind::finite);
    CHECK(est.verdict.value == 0.0);
}

TEST_CASE("dini argument checks") {
    const auto f = StaircaseFunction::sampled({0.0, 1.0}, {0.0, 1.0});
    const auto steps = default_dini_schedule();
    CHECK_THROWS_AS(dini(f, 0.0, DiniSide::left, DiniEnvelope::upper, steps), DomainError);
    CHECK_THROWS_AS(dini(f, 2.0, DiniSide::right, DiniEnvelope::upper, steps), DomainError);
    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(dini(f, 0.5, DiniSide::right, DiniEnvelope::upper, bad), ValidationError);
}

TEST_CASE("find_infinite_dini on Cantor staircases") {
    const auto steps = default_dini_schedule();
    for (const auto& f : {StaircaseFunction::cantor(), StaircaseFunction::affine_plus_cantor(1.0, 1.0),
                          StaircaseFunction::affine_plus_cantor(0.5, 2.0)}) {
        const auto hits = find_infinite_dini(f, {0.0, 1.0}, 729, 50.0, steps);
        CHECK_FALSE(hits.empty());
        for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].max_quotient >= hits[i].max_quotient);
        for (const auto& h : hits) CHECK(h.max_quotient > 50.0);
    }
    // Extended staircase on [0, 3]: every integer is a left end of a Cantor set copy.
    const auto hits = find_infinite_dini(StaircaseFunction::cantor(), {0.0, 3.0}, 3 * 729, 50.0, steps);
    CHECK(hits.size() >= 3);
}

TEST_CASE("find_infinite_dini finds nothing for an affine function") {
    const auto hits = find_infinite_dini(StaircaseFunction::affine_plus_cantor(3.0, 0.0), {0.0, 1.0}, 100, 50.0,
                                         default_dini_schedule());
    CHECK(hits.empty());
    CHECK_THROWS_AS(find_infinite_dini(StaircaseFunction::cantor(), {1.0, 1.0}, 10, 50.0, default_dini_schedule()),
                    DomainError);
    CHECK_THROWS_AS(find_infinite_dini(StaircaseFunction::cantor(), {0.0, 1.0}, 10, 0.0, default_dini_schedule()),
                    ValidationError);
}

TEST_CASE("find_infinite_dini uses left quotients at the right end of a sampled domain") {
    const auto f = StaircaseFunction::sampled({0.0, 0.999, 1.0}, {0.0, 0.0, 1.0});
    const auto hits = find_infinite_dini(f, {0.0, 1.0}, 10, 50.0, geometric_schedule(1e-4, 0.5, 6));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].point == 1.0);
}

namespace {

std::vector<double> samples_of(const StaircaseFunction& f, std::size_t n, double step) {
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = f(static_cast<double>(i) * step);
    return out;
}

void check_decomposition_invariants(const std::vector<double>& samples, const Decomposition& d) {
    const auto total = reconstruct(d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(total[i] == samples[i]);
        CHECK(d.density[i] >= 0.0);
        if (i > 0) CHECK(d.singular[i] >= d.singular[i - 1]);
    }
}

}  // namespace

TEST_CASE("lebesgue_decompose of the identity has no singular part beyond one step") {
    const std::size_t n = 6561;
    const double step = 1.0 / 6561.0;
    const auto samples = samples_of(StaircaseFunction::affine_plus_cantor(1.0, 0.0), n, step);
    const auto d = lebesgue_decompose(samples, step);
    check_decomposition_invariants(samples, d);
    for (std::size_t i = 0; i <= n; ++i) {
        CHECK(d.density[i] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(d.singular[i]) <= step * (1.0 + 1e-9));
    }
}

TEST_CASE("lebesgue_decompose of t + C(t)") {
    const std::size_t n = 6561;
    const double step = 1.0 / 6561.0;
    const auto f = StaircaseFunction::affine_plus_cantor(1.0, 1.0);
    const auto samples = samples_of(f, n, step);
    const DecomposeOptions opts;
    const auto d = lebesgue_decompose(samples, step, opts);
    check_decomposition_invariants(samples, d);
    double mean_dev = 0.0, max_gap = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        mean_dev += std::abs(d.density[i] - 1.0);
        max_gap = std::max(max_gap, std::abs(d.singular[i] - cantor_eval(static_cast<double>(i) * step)));
    }
    mean_dev /= static_cast<double>(n + 1);
    CHECK(mean_dev <= 0.05);
    CHECK(max_gap <= 2.0 * step * opts.cap);
}

TEST_CASE("lebesgue_decompose invariants on random increasing samples") {
    std::mt19937_64 gen(21);
    std::exponential_distribution<double> inc(1.0);
    std::bernoulli_distribution big(0.05);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> samples{0.0};
        for (int i = 0; i < 500; ++i) samples.push_back(samples.back() + (big(gen) ? 50.0 : 1e-3) * inc(gen));
        check_decomposition_invariants(samples, lebesgue_decompose(samples, 1e-3));
    }
}

TEST_CASE("lebesgue_decompose rejects bad input") {
    const std::vector<double> down{0.0, 1.0, 0.5};
    CHECK_THROWS_AS(lebesgue_decompose(down, 0.1), ValidationError);
    const std::vector<double> one{0.0};
    CHECK_THROWS_AS(lebesgue_decompose(one, 0.1), ValidationError);
    const std::vector<double> ok{0.0, 1.0};
    CHECK_THROWS_AS(lebesgue_decompose(ok, 0.0), ValidationError);
}
