// SPDX-License-Identifier: Apache-2.0
//
// Unit tests for array geometry, one-ring correlation, eigentruncation and channel draws.
// Derived expectations are checked against independent oracles implemented here
// (composite-trapezoid quadrature, batch empirical covariance); trivial values are
// asserted directly.

#include <catch2/catch_amalgamated.hpp>

#include "rsmimo/channel.hpp"

using namespace rsmimo;

// ---------- ORACLES ----------

// Independent scalar-loop one-ring evaluation with composite trapezoid quadrature
static arma::cx_mat one_ring_trapezoid(const arma::mat &pos, double theta, double delta,
                                       arma::uword panels)
{
    const arma::uword m = pos.n_cols;
    const double h = 2.0 * delta / (double)panels;
    arma::cx_mat r(m, m, arma::fill::zeros);
    for (arma::uword i = 0; i < m; ++i)
        for (arma::uword j = 0; j <= i; ++j)
        {
            const double dx = pos(0, i) - pos(0, j), dy = pos(1, i) - pos(1, j);
            std::complex<double> acc = 0.0;
            for (arma::uword q = 0; q <= panels; ++q)
            {
                const double a = theta - delta + h * (double)q;
                const double phase = -2.0 * pi * (std::cos(a) * dx + std::sin(a) * dy);
                const double w = (q == 0 || q == panels) ? 0.5 : 1.0;
                acc += w * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            r(i, j) = acc * h / (2.0 * delta);
            r(j, i) = std::conj(r(i, j));
        }
    return r;
}

// ---------- GEOMETRY ----------

TEST_CASE("uca geometry matches hand-derived coordinates for M=3")
{
    // radius 1/(4 sin(pi/3)) = 1/(2 sqrt(3)); second coordinate of element 1 is exactly 1/4
    const double d = 0.28867513459481288;
    const ArrayGeometry geo = uca_positions(3);
    REQUIRE(geo.positions.n_rows == 2);
    REQUIRE(geo.positions.n_cols == 3);
    CHECK(geo.positions(0, 0) == Catch::Approx(d).margin(1e-15));
    CHECK(geo.positions(1, 0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(geo.positions(0, 1) == Catch::Approx(-d / 2).margin(1e-15));
    CHECK(geo.positions(1, 1) == Catch::Approx(0.25).margin(1e-15));
    CHECK(geo.positions(0, 2) == Catch::Approx(-d / 2).margin(1e-15));
    CHECK(geo.positions(1, 2) == Catch::Approx(-0.25).margin(1e-15));
}

TEST_CASE("uca adjacent spacing is half a wavelength for any M")
{
    for (arma::uword m : {2, 3, 8, 64, 100, 256})
    {
        const ArrayGeometry geo = uca_positions(m);
        for (arma::uword i = 0; i < m; ++i)
        {
            const arma::vec d = geo.positions.col((i + 1) % m) - geo.positions.col(i);
            REQUIRE(arma::norm(d) == Catch::Approx(0.5).margin(1e-12));
        }
    }
    CHECK_THROWS_AS(uca_positions(1), std::invalid_argument);
}

// ---------- QUADRATURE ----------

TEST_CASE("gauss-legendre nodes integrate polynomials exactly")
{
    arma::vec nodes, weights;
    detail::gauss_legendre(6, nodes, weights);
    REQUIRE(arma::accu(weights) == Catch::Approx(2.0).margin(1e-14));
    for (arma::uword k = 0; k <= 11; ++k) // exact through degree 2n-1 = 11
    {
        double got = 0.0;
        for (arma::uword q = 0; q < 6; ++q)
            got += weights(q) * std::pow(nodes(q), (double)k);
        const double want = (k % 2 == 0) ? 2.0 / (double)(k + 1) : 0.0;
        REQUIRE(got == Catch::Approx(want).margin(1e-13));
    }
}

TEST_CASE("one-ring quadrature matches trapezoid oracle")
{
    const ArrayGeometry geo = uca_positions(8);
    const OneRingParams params{0.0, pi / 6};
    const arma::cx_mat r_gl = one_ring_matrix(geo, params, 200);
    const arma::cx_mat r_tz = one_ring_trapezoid(geo.positions, 0.0, pi / 6, 1000000);
    REQUIRE(arma::abs(r_gl - r_tz).max() <= 1e-8);
}

// ---------- CORRELATION INVARIANTS ----------

TEST_CASE("one-ring correlation is Hermitian PSD with unit diagonal")
{
    struct Cfg
    {
        arma::uword m;
        double theta, delta;
    };
    for (const Cfg &c : {Cfg{8, 0.0, pi / 6}, Cfg{16, 1.0, pi / 8}, Cfg{32, -pi / 2, pi / 3}})
    {
        const arma::cx_mat r = one_ring_matrix(uca_positions(c.m), {c.theta, c.delta}, 200);
        REQUIRE(arma::abs(arma::cx_mat(r - r.t())).max() <= 1e-12);
        REQUIRE(arma::abs(r.diag() - arma::cx_vec(c.m, arma::fill::ones)).max() <= 1e-10);
        const arma::vec ev = arma::eig_sym(r);
        REQUIRE(ev.min() >= -1e-8);
        REQUIRE(arma::accu(ev) == Catch::Approx((double)c.m).margin(1e-8)); // trace = M
    }
}

TEST_CASE("zero angular spread gives the rank-1 steering outer product")
{
    const arma::cx_mat r = one_ring_matrix(uca_positions(8), {0.7, 0.0}, 200);
    const CorrelationModel model = eigen_truncate(r);
    REQUIRE(model.rank == 1);
    REQUIRE(model.eigenvalues(0) == Catch::Approx(8.0).margin(1e-10));
    REQUIRE(arma::abs(arma::abs(r) - arma::mat(8, 8, arma::fill::ones)).max() <= 1e-12);
}

TEST_CASE("one-ring rejects invalid inputs")
{
    ArrayGeometry geo = uca_positions(4);
    CHECK_THROWS_AS(one_ring_matrix(geo, {0.0, -0.1}), std::invalid_argument);
    geo.positions(0, 0) = arma::datum::nan;
    CHECK_THROWS_AS(one_ring_matrix(geo, {0.0, 0.3}), std::invalid_argument);
}

// ---------- EIGENTRUNCATION ----------

TEST_CASE("eigen_truncate reconstructs the matrix and pins the basis")
{
    const arma::cx_mat r = one_ring_matrix(uca_positions(16), {1.0, pi / 8}, 200);
    const CorrelationModel model = eigen_truncate(r, 1e-10);

    REQUIRE(model.rank >= 1);
    REQUIRE(model.rank <= 16);
    REQUIRE(model.eigenvalues.min() > 0.0);
    for (arma::uword i = 1; i < model.rank; ++i)
        REQUIRE(model.eigenvalues(i) <= model.eigenvalues(i - 1));

    // reconstruction within truncation tolerance
    const arma::cx_mat rec = model.basis * arma::diagmat(model.eigenvalues) * model.basis.t();
    REQUIRE(arma::norm(arma::cx_mat(r - rec), "fro") <= 1e-8 * arma::norm(r, "fro"));
    // factor * factor^H is the same reconstruction
    REQUIRE(arma::norm(arma::cx_mat(rec - model.factor * model.factor.t()), "fro") <= 1e-10 * 16);

    // orthonormal basis
    const arma::cx_mat gram = model.basis.t() * model.basis;
    REQUIRE(arma::abs(gram - arma::cx_mat(model.rank, model.rank, arma::fill::eye)).max() <= 1e-10);

    // phase pin: first significant component of every column real-positive
    for (arma::uword c = 0; c < model.rank; ++c)
    {
        const double mx = arma::abs(model.basis.col(c)).max();
        for (arma::uword i = 0; i < 16; ++i)
        {
            const std::complex<double> u = model.basis(i, c);
            if (std::abs(u) > 1e-12 * mx)
            {
                REQUIRE(std::abs(std::imag(u)) <= 1e-10);
                REQUIRE(std::real(u) > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("eigen_truncate rejects non-Hermitian and indefinite inputs")
{
    arma::cx_mat a(4, 4, arma::fill::randu);
    CHECK_THROWS_AS(eigen_truncate(a), std::invalid_argument);

    arma::cx_mat d(4, 4, arma::fill::zeros);
    d.diag() = arma::cx_vec{{1.0, 0.0}, {1.0, 0.0}, {-0.5, 0.0}, {2.0, 0.0}};
    CHECK_THROWS_AS(eigen_truncate(d), std::invalid_argument);
}

TEST_CASE("eigen_truncate handles the all-zero degenerate correlation")
{
    const arma::cx_mat z(6, 6, arma::fill::zeros);
    const CorrelationModel model = eigen_truncate(z);
    REQUIRE(model.rank == 0);

    substream_rng rng(1, 0, 0);
    ChannelSample s;
    draw_channel(s, {&model}, rng);
    REQUIRE(arma::norm(s.channels.col(0)) == 0.0);
}

// ---------- DRAW STATISTICS ----------

TEST_CASE("empirical covariance of channel draws matches the model")
{
    const arma::uword m = 16, n = 100000;
    const CorrelationModel model = one_ring_correlation(uca_positions(m), {0.7, pi / 8}, 200);
    std::vector<const CorrelationModel *> models{&model};

    arma::cx_mat draws(m, n);
    substream_rng rng(42, 0, 0);
    ChannelSample s;
    for (arma::uword t = 0; t < n; ++t)
    {
        draw_channel(s, models, rng);
        draws.col(t) = s.channels.col(0);
    }
    const arma::cx_mat cov = draws * draws.t() / (double)n;
    const double lmax = model.eigenvalues(0);
    REQUIRE(arma::abs(cov - model.matrix).max() <= 0.02 * lmax);
}

TEST_CASE("csit cross-covariance scales with sqrt(1 - tau^2)")
{
    const arma::uword m = 16, n = 100000;
    const double tau = 0.6;
    const CorrelationModel model = one_ring_correlation(uca_positions(m), {-0.4, pi / 6}, 200);
    std::vector<const CorrelationModel *> models{&model};

    arma::cx_mat hs(m, n), es(m, n);
    substream_rng rng(7, 3, 1);
    for (arma::uword t = 0; t < n; ++t)
    {
        const ChannelSample s = draw_sample(models, arma::vec{tau}, rng);
        hs.col(t) = s.channels.col(0);
        es.col(t) = s.estimates.col(0);
    }
    const arma::cx_mat cross = es * hs.t() / (double)n;               // E[e h^H] = sqrt(1-tau^2) R
    const arma::cx_mat ecov = es * es.t() / (double)n;                // E[e e^H] = R
    const double lmax = model.eigenvalues(0);
    REQUIRE(arma::abs(cross - std::sqrt(1.0 - tau * tau) * model.matrix).max() <= 0.02 * lmax);
    REQUIRE(arma::abs(ecov - model.matrix).max() <= 0.02 * lmax);
}

TEST_CASE("perfect csit reproduces the channel bit for bit")
{
    const CorrelationModel model = one_ring_correlation(uca_positions(12), {0.2, pi / 7}, 200);
    std::vector<const CorrelationModel *> models{&model, &model};

    substream_rng rng(11, 5, 9);
    const ChannelSample s = draw_sample(models, arma::vec{0.0, 0.5}, rng);
    REQUIRE(std::memcmp(s.channels.colptr(0), s.estimates.colptr(0),
                        sizeof(std::complex<double>) * 12) == 0);
    REQUIRE(arma::norm(s.channels.col(1) - s.estimates.col(1)) > 0.0);
}

TEST_CASE("draws are bitwise reproducible per substream and differ across substreams")
{
    const CorrelationModel model = one_ring_correlation(uca_positions(8), {0.1, pi / 6}, 200);
    std::vector<const CorrelationModel *> models{&model};
    const arma::vec tau{0.4};

    substream_rng a(99, 2, 17), b(99, 2, 17), c(99, 2, 18);
    const ChannelSample sa = draw_sample(models, tau, a);
    const ChannelSample sb = draw_sample(models, tau, b);
    const ChannelSample sc = draw_sample(models, tau, c);

    REQUIRE(std::memcmp(sa.channels.memptr(), sb.channels.memptr(),
                        sizeof(std::complex<double>) * sa.channels.n_elem) == 0);
    REQUIRE(std::memcmp(sa.estimates.memptr(), sb.estimates.memptr(),
                        sizeof(std::complex<double>) * sa.estimates.n_elem) == 0);
    REQUIRE(arma::norm(sa.channels - sc.channels, "fro") > 0.0);
}

TEST_CASE("rng moments are sane")
{
    substream_rng rng(123, 0, 0);
    const arma::uword n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (arma::uword i = 0; i < n; ++i)
    {
        const double u = rng.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        const double g = rng.gaussian();
        sum += g;
        sumsq += g * g;
    }
    CHECK(std::abs(sum / (double)n) <= 0.01);
    CHECK(std::abs(sumsq / (double)n - 1.0) <= 0.02);

    // complex variance: E|x|^2 = 1, split evenly between components
    double pre = 0.0, pim = 0.0;
    for (arma::uword i = 0; i < n; ++i)
    {
        const std::complex<double> x = rng.cnormal();
        pre += std::real(x) * std::real(x);
        pim += std::imag(x) * std::imag(x);
    }
    CHECK(std::abs(pre / (double)n - 0.5) <= 0.01);
    CHECK(std::abs(pim / (double)n - 0.5) <= 0.01);
}
