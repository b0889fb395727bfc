#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "coneig/error.hpp"
#include "coneig/function_io.hpp"
#include "coneig/oracle.hpp"

using namespace coneig;

namespace
{

ErrorCode parse_code(const std::string& text)
{
    try
    {
        function_from_json(text);
    }
    catch (const Error& e)
    {
        return e.code();
    }
    return ErrorCode::Ok;
}

} // namespace

TEST_CASE("shortest decimal formatting")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -0.0})
    {
        CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(v))) ==
              std::bit_cast<std::uint64_t>(v));
    }
    CHECK(parse_double("+1.5") == 1.5);
    CHECK_THROWS_AS(parse_double(""), Error);
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
    CHECK_THROWS_AS(parse_double("1e999"), Error);
}

TEST_CASE("function round trip is bit identical")
{
    auto f   = oracle::random_rational(25, 17);
    f.alpha0 = Complex(1.0 / 7.0, -0.0);
    const auto g = function_from_json(function_to_json(f));
    REQUIRE(g.size() == f.size());
    CHECK(std::bit_cast<std::uint64_t>(g.alpha0.real()) == std::bit_cast<std::uint64_t>(f.alpha0.real()));
    CHECK(std::bit_cast<std::uint64_t>(g.alpha0.imag()) == std::bit_cast<std::uint64_t>(f.alpha0.imag()));
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        CHECK(g.terms[i].pole.re_tau == f.terms[i].pole.re_tau);
        CHECK(g.terms[i].pole.im_tau == f.terms[i].pole.im_tau);
        CHECK(g.terms[i].residue == f.terms[i].residue);
    }
    CHECK(function_to_json(g) == function_to_json(f));

    const auto path = (std::filesystem::temp_directory_path() / "coneig_io_roundtrip.json").string();
    write_function(path, f);
    CHECK(function_to_json(read_function(path)) == function_to_json(f));
    std::remove(path.c_str());
}

TEST_CASE("malformed documents")
{
    CHECK(parse_code("{") == ErrorCode::Parse);
    CHECK(parse_code(R"({"terms": []})") == ErrorCode::Parse);
    CHECK(parse_code(R"({"alpha0": {"re": 1, "im": "0"}, "terms": []})") == ErrorCode::Parse);
    CHECK(parse_code(R"({"alpha0": {"re": "1", "im": "0"}, "terms": {}})") == ErrorCode::Parse);
    CHECK(parse_code(R"({"alpha0": {"re": "1", "im": "0"},
                         "terms": [{"re_tau": "1", "im_tau": "0"}]})") == ErrorCode::Parse);
    CHECK(parse_code(R"({"alpha0": {"re": "1", "im": "0"}, "terms": []})") == ErrorCode::Ok);

    try
    {
        function_from_json(R"({"alpha0": {"re": "1", "im": "0"},
            "terms": [{"re_tau": "1", "im_tau": "0", "residue": {"re": "1", "im": "0"}},
                      {"re_tau": "abc", "im_tau": "0", "residue": {"re": "1", "im": "0"}}]})");
        FAIL("no exception");
    }
    catch (const Error& e)
    {
        CHECK(std::string(e.what()).find("$.terms[1].re_tau") != std::string::npos);
    }

    try
    {
        read_function("/nonexistent/dir/f.json");
        FAIL("no exception");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::Io);
    }
}

TEST_CASE("report and CSV output")
{
    ReductionReport r;
    r.m        = 2;
    r.lambda_m = 1e-10;
    r.sup_error = 1.5e-10;
    r.root_exponents = {ExponentPole{0.5, 1.0}, ExponentPole{0.25, 2.0}};
    const std::string js = report_to_json(r);
    CHECK(js.find("\"m\": 2") != std::string::npos);
    CHECK(js.find("\"1e-10\"") != std::string::npos);
    CHECK(js.find("\"0.25\"") != std::string::npos);

    RationalFunction c;
    c.alpha0 = Complex(2.0, 0.0);
    const std::string csv = eval_csv(c, 64);
    CHECK(csv.rfind("x,re,im\n", 0) == 0);
    CHECK(csv.find("0,2,0\n") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : csv)
    {
        lines += ch == '\n';
    }
    CHECK(lines == 65);
}
