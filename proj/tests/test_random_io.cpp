#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "thermodemon/io.hpp"
#include "thermodemon/parallel.hpp"
#include "thermodemon/random.hpp"

using namespace thermodemon;

TEST_CASE("seeds are stable and distinct")
{
    static_assert(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2, 0) != derive_seed(1, 2, 1));
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("samplers have the right moments")
{
    Rng rng(11);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0, se = 0;
    for (int i = 0; i < n; ++i)
    {
        su += rng.uniform();
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        se += rng.exponential(2.0);
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("parallel_for results do not depend on thread count")
{
    auto run = []
    {
        std::vector<double> out(1000);
        parallel_for(out.size(), [&](std::size_t i)
                     {
                         Rng r(derive_seed(5, i));
                         out[i] = r.normal();
                     });
        return out;
    };
    setenv("THERMODEMON_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    const auto serial = run();
    setenv("THERMODEMON_THREADS", "4", 1);
    const auto parallel = run();
    unsetenv("THERMODEMON_THREADS");
    CHECK(serial == parallel);
    CHECK_THROWS(parallel_for(10, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }));
}

TEST_CASE("csv formatting is locale free and round-trips")
{
    CHECK(io::format_number(0.5) == "0.5");
    CHECK(io::format_number(-1.0) == "-1");
    CHECK(std::stod(io::format_number(0.1 + 0.2)) == 0.1 + 0.2);
    io::CsvWriter w("a,b,c");
    w.field(1.25).field(std::size_t{3}).field(true).end_row();
    CHECK(w.str() == "a,b,c\n1.25,3,1\n");
}
