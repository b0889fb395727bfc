#include "coneig/function_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "coneig/error.hpp"

namespace coneig
{

using nlohmann::json;

namespace
{

json complex_to_json(Complex z)
{
    return json{{"re", format_double(z.real())}, {"im", format_double(z.imag())}};
}

const json& member(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
    {
        raise(ErrorCode::Parse, where + ": missing \"" + key + "\"");
    }
    return obj.at(key);
}

double number_at(const json& obj, const char* key, const std::string& where)
{
    const json& v = member(obj, key, where);
    if (!v.is_string())
    {
        raise(ErrorCode::Parse, where + "." + key + ": expected a decimal string");
    }
    try
    {
        return parse_double(v.get<std::string>());
    }
    catch (const Error& e)
    {
        raise(ErrorCode::Parse, where + "." + key + ": " + e.what());
    }
}

Complex complex_at(const json& obj, const char* key, const std::string& where)
{
    const json& v      = member(obj, key, where);
    const std::string w = where + "." + key;
    return {number_at(v, "re", w), number_at(v, "im", w)};
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    double v         = 0.0;
    const char* first = s.data();
    const char* last  = s.data() + s.size();
    if (first != last && *first == '+')
    {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (s.empty() || res.ec == std::errc::invalid_argument || res.ptr != last)
    {
        raise(ErrorCode::Parse, "not a decimal number: \"" + s + "\"");
    }
    if (res.ec == std::errc::result_out_of_range)
    {
        raise(ErrorCode::Parse, "decimal out of double range: \"" + s + "\"");
    }
    return v;
}

std::string function_to_json(const RationalFunction& f)
{
    json terms = json::array();
    for (const auto& t : f.terms)
    {
        terms.push_back({{"re_tau", format_double(t.pole.re_tau)},
                         {"im_tau", format_double(t.pole.im_tau)},
                         {"residue", complex_to_json(t.residue)}});
    }
    json doc{{"alpha0", complex_to_json(f.alpha0)}, {"terms", terms}};
    return doc.dump(2) + "\n";
}

RationalFunction function_from_json(const std::string& text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::exception& e)
    {
        raise(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    }
    RationalFunction f;
    f.alpha0           = complex_at(doc, "alpha0", "$");
    const json& terms  = member(doc, "terms", "$");
    if (!terms.is_array())
    {
        raise(ErrorCode::Parse, "$.terms: expected an array");
    }
    for (std::size_t i = 0; i < terms.size(); ++i)
    {
        const std::string where = "$.terms[" + std::to_string(i) + "]";
        const json& t           = terms[i];
        PoleTerm pt;
        // im_tau is kept as written; validate() normalizes it
        pt.pole.re_tau = number_at(t, "re_tau", where);
        pt.pole.im_tau = number_at(t, "im_tau", where);
        pt.residue     = complex_at(t, "residue", where);
        f.terms.push_back(pt);
    }
    return f;
}

RationalFunction read_function(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        raise(ErrorCode::Io, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
    {
        raise(ErrorCode::Io, "read failed: " + path);
    }
    return function_from_json(ss.str());
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        raise(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    out << text;
    out.flush();
    if (!out)
    {
        raise(ErrorCode::Io, "write failed: " + path);
    }
}

void write_function(const std::string& path, const RationalFunction& f)
{
    write_text(path, function_to_json(f));
}

std::string report_to_json(const ReductionReport& r)
{
    json roots = json::array();
    for (const auto& z : r.root_exponents)
    {
        roots.push_back({{"re", format_double(z.re_tau)}, {"im", format_double(z.im_tau)}});
    }
    json doc{{"m", r.m},
             {"lambda_m", format_double(r.lambda_m)},
             {"sup_error", format_double(r.sup_error)},
             {"digits", r.digits},
             {"newton_iters", r.newton_iters},
             {"root_exponents", roots}};
    return doc.dump(2) + "\n";
}

std::string eval_csv(const RationalFunction& f, std::size_t base_points)
{
    std::string out = "x,re,im\n";
    char line[96];
    for (const auto& p : adaptive_grid({&f}, base_points))
    {
        const Complex v = evaluate_on_circle(f, p.hi, p.lo);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.x(), v.real(), v.imag());
        out += line;
    }
    return out;
}

} // namespace coneig
