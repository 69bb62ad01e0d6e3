#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biquad/curve.hpp"
#include "biquad/johnmap.hpp"
#include "biquad/nonuniq.hpp"
#include "biquad/pellabel.hpp"
#include "biquad/physics.hpp"
#include "biquad/poncelet.hpp"

namespace biquad::cli {

namespace {

using json = nlohmann::ordered_json;
using poncelet::Conic;
using poncelet::Mat3;
using poncelet::Mat3Q;

constexpr const char* schema = "v1";
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Config {
    std::string command;
    // curve input
    std::string curve_json, curve_inline, eb;
    bool exact = false;
    long maxden = 64;
    double tol_rational = 1e-8, tol_on_curve = 1e-7, tol_period = 1e-6, tol_cayley = 1e-9;
    int max_iter = 1000;
    double x = nan, y = nan;
    std::string csv, svg, emit;
    // conics
    std::string conic_a, conic_b, circles;
    int N = 12;
    double start = nan;
    // bicentric
    double R = 2, r = 1, d = 0;
    int n = 3;
    // pell-abel, malyshev
    std::string quartic;
    int max_deg = 16, gamma_k = 4;
    bool rationalize = false;
    // dirichlet
    std::string ellipse;
    int level = 1;
    // toda
    double g2 = 4, g3 = 1, p = 0.37, p_im = 0, omega = 0.7, r_re = 0, r_im = 0, lambda = 0;
    bool r_given = false;
    double t0 = 0, dt = 0.1, h = 1e-5;
    int steps = 20, n0 = 0, n1 = 5, period_N = 0, period_m1 = 1;
    // xy
    double j = 2, W = nan, theta = 0;
    int m1 = 1;
    // crosscheck
    std::uint64_t seed = 7;
    int cases = 20, threads = 0;
};

// --- parsing helpers -----------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep = ',')
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        out.push_back(item);
    }
    return out;
}

bool is_rational_literal(const std::string& s)
{
    return !s.empty() && s.find_first_not_of("+-0123456789/") == std::string::npos;
}

rat parse_rat(const std::string& s)
{
    if (!is_rational_literal(s)) throw invalid("NonRationalInput", "'" + s + "' is not an integer or p/q");
    try {
        rat v(s[0] == '+' ? s.substr(1) : s);
        v.canonicalize();
        return v;
    } catch (const std::exception&) {
        throw invalid("BadNumber", "cannot parse '" + s + "'");
    }
}

double parse_double(const std::string& s)
{
    if (is_rational_literal(s)) return parse_rat(s).get_d();
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw invalid("BadNumber", "cannot parse '" + s + "'");
    }
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw invalid("FileNotFound", path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw invalid("BadJson", path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw invalid("CannotWrite", path);
    out << text;
}

std::string str(const rat& v) { return v.get_str(); }

json entry_value(const json& e, bool exact, rat* q)
{
    if (e.is_string()) {
        const std::string s = e.get<std::string>();
        if (q) *q = parse_rat(s);
        return parse_double(s);
    }
    if (!e.is_number()) throw invalid("BadJson", "matrix entries must be numbers or \"p/q\" strings");
    if (e.is_number_integer()) {
        if (q) *q = rat(e.get<long>());
        return e.get<double>();
    }
    if (exact && q) throw invalid("NonRationalInput", "exact mode needs integer or \"p/q\" entries");
    return e.get<double>();
}

template <class F>
void read_matrix(const json& m, bool exact, F&& set)
{
    if (!m.is_array() || m.size() != 3) throw invalid("BadJson", "expected a 3 x 3 array");
    for (int i = 0; i < 3; ++i) {
        if (!m[i].is_array() || m[i].size() != 3) throw invalid("BadJson", "expected a 3 x 3 array");
        for (int k = 0; k < 3; ++k) {
            rat q;
            double v = entry_value(m[i][k], exact, exact ? &q : nullptr).get<double>();
            set(i, k, v, q);
        }
    }
}

struct CurveInput {
    curve::Curve c;
    std::optional<curve::CurveQ> exact;
};

CurveInput load_curve(const Config& cfg)
{
    CurveInput in;
    int given = !cfg.curve_json.empty() + !cfg.curve_inline.empty() + !cfg.eb.empty();
    if (given != 1) throw invalid("MissingCurve", "give exactly one of --curve-json, --curve, --eb");
    if (!cfg.curve_json.empty()) {
        json j = read_json_file(cfg.curve_json);
        if (!j.contains("a")) throw invalid("BadJson", "curve JSON needs key \"a\"");
        curve::CurveQ q;
        read_matrix(j["a"], cfg.exact, [&](int i, int k, double v, const rat& r) {
            in.c.a[i][k] = v;
            q.a[i][k] = r;
        });
        if (cfg.exact) in.exact = q;
        return in;
    }
    auto toks = split(cfg.curve_inline.empty() ? cfg.eb : cfg.curve_inline);
    if (!cfg.eb.empty()) {
        if (toks.size() != 3) throw invalid("BadCurve", "--eb takes a,b,c");
        if (cfg.exact) {
            rat a = parse_rat(toks[0]), b = parse_rat(toks[1]), c = parse_rat(toks[2]);
            curve::CurveQ q;
            q.a[2][2] = 1;
            q.a[2][0] = q.a[0][2] = a;
            q.a[1][1] = 2 * b;
            q.a[0][0] = c;
            in.exact = q;
        }
        in.c = curve::euler_baxter(parse_double(toks[0]), parse_double(toks[1]), parse_double(toks[2]));
        return in;
    }
    if (toks.size() != 9) throw invalid("BadCurve", "--curve takes a00,a01,...,a22 (row i = x-degree)");
    curve::CurveQ q;
    for (int i = 0; i < 9; ++i) {
        in.c.a[i / 3][i % 3] = parse_double(toks[i]);
        if (cfg.exact) q.a[i / 3][i % 3] = parse_rat(toks[i]);
    }
    if (cfg.exact) in.exact = q;
    return in;
}

Conic load_conic(const std::string& path, std::optional<Mat3Q>* exact)
{
    json j = read_json_file(path);
    if (!j.contains("M")) throw invalid("BadJson", "conic JSON needs key \"M\"");
    Conic c;
    Mat3Q q{};
    read_matrix(j["M"], exact != nullptr, [&](int i, int k, double v, const rat& r) {
        c.M[i][k] = v;
        q[i][k] = r;
    });
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < i; ++k)
            if (c.M[i][k] != c.M[k][i]) throw invalid("NonSymmetricConic", path);
    if (exact) *exact = q;
    return c;
}

// --circles r,R[,d]: inner circle radius r centred at (d, 0), outer radius R at the origin
struct ConicPair {
    Conic A, B;
    std::optional<Mat3Q> Aq, Bq;
    json description;
};

Mat3Q circle_q(const rat& cx, const rat& r)
{
    Mat3Q m{};
    m[0][0] = cx * cx - r * r;
    m[0][1] = m[1][0] = -cx;
    m[1][1] = m[2][2] = 1;
    return m;
}

ConicPair load_pair(const Config& cfg)
{
    ConicPair p;
    if (!cfg.circles.empty()) {
        auto toks = split(cfg.circles);
        if (toks.size() != 2 && toks.size() != 3) throw invalid("BadCircles", "--circles r,R[,d]");
        double r = parse_double(toks[0]), R = parse_double(toks[1]), d = toks.size() == 3 ? parse_double(toks[2]) : 0;
        if (!(r > 0) || !(R > 0)) throw invalid("BadCircles", "radii must be positive");
        p.A = Conic::circle(d, 0, r);
        p.B = Conic::circle(0, 0, R);
        if (cfg.exact) {
            rat dq = toks.size() == 3 ? parse_rat(toks[2]) : rat(0);
            p.Aq = circle_q(dq, parse_rat(toks[0]));
            p.Bq = circle_q(0, parse_rat(toks[1]));
        }
        p.description = {{"circles", {{"r", r}, {"R", R}, {"d", d}}}};
        return p;
    }
    if (cfg.conic_a.empty() || cfg.conic_b.empty()) throw invalid("MissingConics", "give --circles or --conic-a and --conic-b");
    p.A = load_conic(cfg.conic_a, cfg.exact ? &p.Aq : nullptr);
    p.B = load_conic(cfg.conic_b, cfg.exact ? &p.Bq : nullptr);
    p.description = {{"conic_a", cfg.conic_a}, {"conic_b", cfg.conic_b}};
    return p;
}

PolyQ parse_quartic(const Config& cfg, json& report)
{
    auto toks = split(cfg.quartic);
    if (toks.empty() || cfg.quartic.empty()) throw invalid("MissingQuartic", "--quartic c4,c3,c2,c1,c0");
    std::vector<rat> asc;
    bool floats = std::any_of(toks.begin(), toks.end(), [](const std::string& t) { return !is_rational_literal(t); });
    if (floats && !cfg.rationalize)
        throw invalid("NonRationalInput", "decimal coefficients need --rationalize");
    if (floats) {
        std::vector<double> v;
        for (auto it = toks.rbegin(); it != toks.rend(); ++it) v.push_back(parse_double(*it));
        report["warning"] = "decimal coefficients were rationalized at relative tolerance 1e-12";
        return pell::rationalize(PolyD(v), 1e-12);
    }
    for (auto it = toks.rbegin(); it != toks.rend(); ++it) asc.push_back(parse_rat(*it));
    return PolyQ(asc);
}

// --- JSON helpers --------------------------------------------------------------

json curve_json(const curve::Curve& c)
{
    json a = json::array();
    for (const auto& r : c.a) a.push_back({r[0], r[1], r[2]});
    return {{"a", a}};
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

// descending coefficients, matching the --quartic input
json poly_json(const PolyQ& p)
{
    json a = json::array();
    for (int i = p.degree(); i >= 0; --i) a.push_back(str(p[i]));
    if (p.is_zero()) a.push_back("0");
    return a;
}

json verdict_json(const john::RationalVerdict& v, double tol)
{
    return {{"identity", "rotation number of the John map from the elliptic shift"},
            {"value", v.value},
            {"stated", v.stated},
            {"family", curve::param_family_name(v.family)},
            {"rational", v.rational},
            {"m", v.m},
            {"n", v.n},
            {"orbit_period", v.period},
            {"swaps_components", v.swaps_components},
            {"residual", v.residual},
            {"tol", tol},
            {"max_denominator", v.max_denominator}};
}

curve::Curve canonical_curve(const curve::CanonicalTag& t)
{
    if (t.family == curve::Family::ASYM_iii) return curve::asym_iii(t.a, t.b, t.c);
    return curve::euler_baxter(t.a, t.b, t.c);
}

json tag_json(const curve::CanonicalTag& t)
{
    return {{"family", curve::family_name(t.family)},
            {"subcase", t.subcase},
            {"a", t.a},
            {"b", t.b},
            {"c", t.c},
            {"scale", t.scale},
            {"x_vertices", t.x_vertices},
            {"y_vertices", t.y_vertices}};
}

std::string genus_name(curve::GenusKind k)
{
    switch (k) {
    case curve::GenusKind::elliptic: return "elliptic";
    case curve::GenusKind::singular: return "singular";
    case curve::GenusKind::reducible: return "reducible";
    }
    return "reducible";
}

// the canonical tag of a curve, directly or through the symmetric reduction
struct Tagged {
    curve::CanonicalTag tag;
    bool reduced = false;
    double off_form = 0;
};

Tagged tag_curve(const curve::Curve& c, double tol)
{
    Tagged t;
    try {
        t.tag = curve::classify(c, tol);
    } catch (const Error& e) {
        if (!c.is_symmetric()) throw;
        auto red = curve::reduce_symmetric_to_eb(c);
        t.tag = red.tag;
        t.reduced = true;
        t.off_form = red.off_form_residual;
    }
    return t;
}

// a real start point: the given (x, y), or x alone with the smaller real y, or a branch point
john::CurvePoint start_point(const Config& cfg, const curve::Curve& c, const std::optional<curve::Parameterization>& p)
{
    if (!std::isnan(cfg.x) && !std::isnan(cfg.y)) return john::make_point(c, cfg.x, cfg.y);
    if (!std::isnan(cfg.x)) {
        auto A = curve::a_form(c);
        double a2 = A[2](cfg.x), a1 = A[1](cfg.x), a0 = A[0](cfg.x);
        double disc = a1 * a1 - 4 * a2 * a0;
        if (disc < 0 || a2 == 0) throw invalid("NoRealPoint", "no real y over the given x");
        double y = (-a1 - std::sqrt(disc)) / (2 * a2);
        return john::make_point(c, cfg.x, y);
    }
    if (!p) throw invalid("NoStart", "give --x (and --y) for curves outside the canonical forms");
    for (double f : {0.137, 0.311, 0.587})
        if (auto q = p->point(p->branch_base[0] + p->dir * (f * p->line_period))) {
            if (std::abs(q->first.imag()) > 1e-9 || std::abs(q->second.imag()) > 1e-9) continue;
            return john::make_point(c, q->first.real(), q->second.real());
        }
    throw invalid("NoStart", "no finite real point found on the first branch");
}

// --- commands --------------------------------------------------------------------

json cmd_analyze(const Config& cfg)
{
    auto in = load_curve(cfg);
    const auto& c = in.c;
    json j{{"curve", curve_json(c)}};

    auto g = curve::genus_and_singularities(c);
    j["genus"] = {{"kind", genus_name(g.kind)}, {"delta", g.delta}};
    if (g.kind == curve::GenusKind::elliptic) {
        auto [g21, g31] = curve::curve_invariants(c);
        auto [g22, g32] = curve::curve_invariants(c.transposed());
        double rel = std::max(std::abs(g21 - g22) / std::max(std::abs(g21), 1e-300),
                              std::abs(g31 - g32) / std::max(std::abs(g31), 1e-300));
        if (g21 == 0 && g22 == 0) rel = std::abs(g31 - g32) / std::max(std::abs(g31), 1e-300);
        j["invariants"] = {{"identity", "the two discriminants share g2 and g3"},
                           {"D1", {g21, g31}},
                           {"D2", {g22, g32}},
                           {"residual", rel},
                           {"tol", 1e-10}};
        if (in.exact) {
            auto [q21, q31] = curve::curve_invariants(*in.exact);
            auto [q22, q32] = curve::curve_invariants(in.exact->transposed());
            j["invariants"]["exact"] = {{"D1", {str(q21), str(q31)}},
                                        {"D2", {str(q22), str(q32)}},
                                        {"equal", q21 == q22 && q31 == q32}};
        }
    }
    if (g.kind != curve::GenusKind::elliptic) {
        j["note"] = "not an elliptic curve; no parameterization";
        return j;
    }

    auto t = tag_curve(c, 1e-10);
    j["tag"] = tag_json(t.tag);
    j["tag"]["reduced"] = t.reduced;
    if (t.reduced) j["tag"]["off_form_residual"] = t.off_form;
    if (t.tag.family == curve::Family::degenerate) {
        j["note"] = "degenerate canonical form";
        return j;
    }
    if (t.tag.family == curve::Family::EB_i && t.tag.subcase == 0) {
        j["note"] = "no real points";
        return j;
    }
    auto p = curve::parameterize(t.tag);
    j["parameterization"] = {{"family", curve::param_family_name(p.family)},
                             {"k", p.modulus.k},
                             {"K", p.modulus.K},
                             {"Kp", p.modulus.Kp},
                             {"eta", cplx_json(p.eta)},
                             {"shift", cplx_json(p.shift())},
                             {"residual", p.max_residual(t.reduced ? canonical_curve(t.tag) : c)},
                             {"tol", 1e-9}};
    auto v = john::periodicity_criterion(t.tag, cfg.maxden, cfg.tol_rational);
    j["rotation"] = verdict_json(v, cfg.tol_rational);
    if (!t.reduced) {
        try {
            auto s = start_point(cfg, c, p);
            auto rot = john::rotation_number(p, c, s, cfg.max_iter);
            j["rotation"]["birkhoff"] = rot.birkhoff;
            j["rotation"]["birkhoff_iterations"] = cfg.max_iter;
        } catch (const Error& e) {
            j["rotation"]["birkhoff_note"] = e.what();
        }
    }
    return j;
}

json cmd_john_orbit(const Config& cfg)
{
    auto in = load_curve(cfg);
    const auto& c = in.c;
    std::optional<curve::Parameterization> p;
    try {
        auto t = tag_curve(c, 1e-10);
        if (!t.reduced && t.tag.family != curve::Family::degenerate &&
            !(t.tag.family == curve::Family::EB_i && t.tag.subcase == 0))
            p = curve::parameterize(t.tag);
    } catch (const Error&) {
    }
    auto s = start_point(cfg, c, p);
    if (s.residual > cfg.tol_on_curve) throw invalid("NotOnCurve", "start residual " + std::to_string(s.residual));
    auto o = john::orbit(c, s, cfg.max_iter, cfg.tol_period);
    double worst = 0;
    for (const auto& q : o.points) worst = std::max(worst, q.residual);
    json j{{"curve", curve_json(c)},
           {"start", {s.x.value(), s.y.value()}},
           {"iterations", (int)o.points.size() - 1},
           {"period", o.period ? json(*o.period) : json(nullptr)},
           {"period_tol", cfg.tol_period},
           {"on_curve", {{"residual", worst}, {"tol", cfg.tol_on_curve}}}};
    if (o.period && p) j["turns"] = john::orbit_turns(*p, c, o);
    if (!cfg.csv.empty()) {
        write_file(cfg.csv, john::orbit_csv(o));
        j["csv"] = cfg.csv;
    }
    return j;
}

std::string svg_plot(const Conic& A, const Conic& B, const std::vector<poncelet::PonceletState>& tr)
{
    std::vector<std::vector<std::pair<double, double>>> curves;
    for (const Conic* c : {&A, &B}) {
        auto E = poncelet::rational_parameterization(*c);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= 720; ++i) {
            double t = std::tan(std::numbers::pi * (i / 720.0 - 0.5) * 0.999);
            auto v = poncelet::eval(E, t);
            if (std::abs(v[0]) < 1e-12) continue;
            pts.emplace_back(v[1] / v[0], v[2] / v[0]);
        }
        curves.push_back(pts);
    }
    std::vector<std::pair<double, double>> poly;
    for (const auto& s : tr) poly.emplace_back(s.P[1] / s.P[0], s.P[2] / s.P[0]);

    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& [x, y] : poly) {
        lo_x = std::min(lo_x, x);
        hi_x = std::max(hi_x, x);
        lo_y = std::min(lo_y, y);
        hi_y = std::max(hi_y, y);
    }
    for (const auto& pts : curves)
        for (auto [x, y] : pts)
            if (std::abs(x) < 50 && std::abs(y) < 50) {
                lo_x = std::min(lo_x, x);
                hi_x = std::max(hi_x, x);
                lo_y = std::min(lo_y, y);
                hi_y = std::max(hi_y, y);
            }
    double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9}) * 1.1;
    double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    auto X = [&](double x) { return 500 + 480 * (x - cx) / (span / 2) / 2; };
    auto Y = [&](double y) { return 500 - 480 * (y - cy) / (span / 2) / 2; };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n";
    os << "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
    const char* colors[] = {"#1f77b4", "#2ca02c"};
    for (int k = 0; k < 2; ++k) {
        // split the sampled curve where it jumps (hyperbola branches)
        os << "<path fill=\"none\" stroke=\"" << colors[k] << "\" stroke-width=\"2\" d=\"";
        bool pen = false;
        std::pair<double, double> prev{};
        for (auto [x, y] : curves[k]) {
            bool far = std::abs(x - cx) > 5 * span || std::abs(y - cy) > 5 * span;
            if (far) {
                pen = false;
                continue;
            }
            bool jump = pen && std::hypot(x - prev.first, y - prev.second) > span / 4;
            os << ((pen && !jump) ? " L " : " M ") << X(x) << ' ' << Y(y);
            pen = true;
            prev = {x, y};
        }
        os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : poly) os << X(x) << ',' << Y(y) << ' ';
    os << "\"/>\n</svg>\n";
    return os.str();
}

json cmd_poncelet(const Config& cfg)
{
    auto pr = load_pair(cfg);
    auto EA = poncelet::rational_parameterization(pr.A);
    auto disp = poncelet::disposition(pr.A, pr.B);
    std::optional<poncelet::PonceletState> s0;
    if (std::isnan(cfg.start)) s0 = poncelet::find_start(pr.A, pr.B, EA);
    else s0 = poncelet::start_state(pr.A, pr.B, EA, cfg.start);
    if (!s0) throw degenerate("NoRealIntersection", "no tangent of A meets B");
    auto period = poncelet::poncelet_period(pr.A, pr.B, *s0, cfg.N, 1e-8);
    int steps = period ? *period : cfg.N;
    auto tr = poncelet::trajectory(pr.A, pr.B, *s0, steps);
    double tang = 0;
    for (const auto& s : tr) tang = std::max(tang, poncelet::tangency_defect(pr.A, s));
    json j = pr.description;
    j["disposition"] = {{"kind", disp.kind}, {"intersections", disp.intersections}, {"tangents", disp.tangents}};
    j["max_N"] = cfg.N;
    j["period"] = period ? json(*period) : json(nullptr);
    j["closure"] = {{"identity", "the polygon returns to its first vertex"},
                    {"residual", poncelet::state_distance(tr.back(), tr.front())},
                    {"tol", 1e-8},
                    {"steps", steps}};
    j["tangency"] = {{"residual", tang}, {"tol", 1e-9}};
    if (!cfg.csv.empty()) {
        write_file(cfg.csv, poncelet::trajectory_csv(tr));
        j["csv"] = cfg.csv;
    }
    if (!cfg.svg.empty()) {
        write_file(cfg.svg, svg_plot(pr.A, pr.B, tr));
        j["svg"] = cfg.svg;
    }
    return j;
}

json cmd_cayley(const Config& cfg)
{
    auto pr = load_pair(cfg);
    if (cfg.N < 3) throw invalid("InvalidPeriod", "--N >= 3");
    json j = pr.description;
    j["N"] = cfg.N;
    j["identity"] = "Hankel determinant of the Taylor coefficients of sqrt(det(A - zB))";
    if (cfg.exact) {
        if (!pr.Aq || !pr.Bq) throw invalid("NonRationalInput", "exact mode needs rational conics");
        auto r = poncelet::cayley_test(*pr.Aq, *pr.Bq, cfg.N);
        j["mode"] = "exact";
        j["det"] = str(r.det);
        j["verdict"] = r.periodic ? "zero" : "nonzero";
        json cs = json::array();
        for (const auto& c : r.c) cs.push_back(str(c));
        j["c"] = cs;
        std::optional<int> first;
        for (int n = 3; n <= cfg.N && !first; ++n)
            if (poncelet::cayley_test(*pr.Aq, *pr.Bq, n).periodic) first = n;
        j["period"] = first ? json(*first) : json(nullptr);
        return j;
    }
    auto r = poncelet::cayley_test(pr.A.M, pr.B.M, cfg.N, cfg.tol_cayley);
    j["mode"] = "float";
    j["det"] = r.det;
    j["verdict"] = r.periodic ? "zero" : "nonzero";
    j["distance"] = r.distance;
    j["tol"] = cfg.tol_cayley;
    j["c"] = r.c;
    std::optional<int> first;
    for (int n = 3; n <= cfg.N && !first; ++n)
        if (poncelet::cayley_test(pr.A.M, pr.B.M, n, cfg.tol_cayley).periodic) first = n;
    j["period"] = first ? json(*first) : json(nullptr);
    return j;
}

json cmd_bicentric(const Config& cfg)
{
    auto b = poncelet::bicentric_check(cfg.R, cfg.r, cfg.d, cfg.n);
    json j{{"R", cfg.R}, {"r", cfg.r}, {"d", cfg.d}, {"n", cfg.n}};
    if (b.closed_form)
        j["closed_form"] = {{"lhs", b.lhs}, {"rhs", b.rhs}, {"verdict", b.verdict}, {"tol", 1e-9}};
    j["general"] = {{"lhs", b.sc_lhs}, {"rhs", b.sc_rhs}, {"verdict", b.general_verdict}, {"tol", 1e-9}};
    // geometric closure of the same circle pair
    Conic A = Conic::circle(cfg.d, 0, cfg.r), B = Conic::circle(0, 0, cfg.R);
    auto EA = poncelet::rational_parameterization(A);
    auto s = poncelet::start_state(A, B, EA, 0.3);
    auto period = poncelet::poncelet_period(A, B, s, std::max(64, 2 * cfg.n));
    auto tr = poncelet::trajectory(A, B, s, cfg.n);
    j["geometric"] = {{"period", period ? json(*period) : json(nullptr)},
                      {"closure_residual", poncelet::state_distance(tr.back(), tr.front())},
                      {"tol", 1e-8}};
    return j;
}

json gamma_json(const PolyQ& R, int kmax, std::optional<int>* first_zero = nullptr)
{
    json g = json::array();
    for (int k = 1; k <= kmax; ++k) {
        rat v = pell::malyshev_gamma(R, k);
        if (first_zero && !*first_zero && sgn(v) == 0) *first_zero = k;
        g.push_back(str(v));
    }
    return g;
}

json cmd_pell_abel(const Config& cfg)
{
    json j;
    PolyQ R = parse_quartic(cfg, j);
    j["R"] = poly_json(R);
    j["gamma"] = gamma_json(R, cfg.gamma_k);
    try {
        auto s = pell::pell_abel_solve(R, cfg.max_deg);
        j["solvable"] = true;
        j["P"] = poly_json(s.P);
        j["Q"] = poly_json(s.Q);
        j["L"] = str(s.L);
        j["lead"] = str(s.lead);
        j["steps"] = s.steps;
        j["verified"] = pell::verify(s);
        j["identity"] = "P^2 - (R / lead) Q^2 = L";
        double t0 = 0, t1 = 0;
        auto real_ok = [&](double t) { return R.cast<double>()(t) > 0; };
        for (double a : {2.0, 3.0, 5.0, -2.0, -3.0})
            if (real_ok(a) && real_ok(a + 0.5)) {
                t0 = a;
                t1 = a + 0.5;
                break;
            }
        if (t1 != t0) j["abel"] = {{"interval", {t0, t1}}, {"residual", pell::abel_integral_check(s, t0, t1)}, {"tol", 1e-8}};
    } catch (const Error& e) {
        if (e.name() != "BudgetExhausted") throw;
        j["solvable"] = false;
        j["budget_exhausted"] = true;
        j["max_deg_Q"] = cfg.max_deg;
        j["note"] = e.what();
        j["exit_code"] = static_cast<int>(e.kind());
    }
    return j;
}

json cmd_malyshev(const Config& cfg)
{
    json j;
    PolyQ R = parse_quartic(cfg, j);
    j["R"] = poly_json(R);
    std::optional<int> first;
    j["identity"] = "Gamma_k = det[C_(i+j+1)] on the monic R";
    j["gamma"] = gamma_json(R, cfg.gamma_k, &first);
    json fl = json::array();
    for (int k = 1; k <= cfg.gamma_k; ++k) fl.push_back(pell::malyshev_gamma(R.cast<double>(), k));
    j["gamma_float"] = fl;
    j["first_zero"] = first ? json(*first) : json(nullptr);
    if (first) j["implied_deg_P"] = *first + 1;
    return j;
}

json rational_json(const RationalQ& r)
{
    return {{"num", poly_json(r.num())}, {"den", poly_json(r.den())}};
}

json witness_json(const nonuniq::SeparatedSolution& s, std::optional<double> k)
{
    json w{{"identity", "f(x) + g(y) = 0 on the curve"},
           {"curve", curve_json(s.curve)},
           {"M", s.M},
           {"N", s.N},
           {"level", s.level},
           {"multiplier", s.multiplier},
           {"x_scale", s.x_scale},
           {"y_scale", s.y_scale}};
    if (s.exact) {
        w["f"] = rational_json(*s.exact);
        w["f"]["argument"] = "x / x_scale";
        w["g"] = rational_json(RationalQ(PolyQ::constant(rat(0))) - *s.exact);
        w["g"]["argument"] = "y / y_scale";
    } else {
        w["f"] = nullptr;
        w["g"] = nullptr;
        w["evaluator"] = {{"f", "cn(L * F(acos(x / x_scale), k), k)"}, {"g", "-cn(L * F(acos(y / y_scale), k), k)"}, {"L", s.multiplier}};
        if (k) w["evaluator"]["k"] = *k;
    }
    w["residual"] = s.residual;
    w["samples"] = s.samples;
    w["tol"] = 1e-9;
    json pr = json::array();
    for (const auto& p : s.probes) pr.push_back({{"x", p[0]}, {"y", p[1]}, {"u", p[2]}});
    w["probes"] = pr;
    return w;
}

json cmd_dirichlet(const Config& cfg)
{
    json j;
    std::optional<nonuniq::SeparatedSolution> w;
    std::optional<double> k;
    if (!cfg.ellipse.empty()) {
        auto mn = split(cfg.ellipse, '/');
        if (mn.size() != 2) throw invalid("BadEllipse", "--ellipse M/N for eps = pi M / N");
        int M = std::stoi(mn[0]), N = std::stoi(mn[1]);
        w = nonuniq::ellipse_solution(M, N, cfg.level);
        j["ellipse"] = {{"M", w->M}, {"N", w->N}};
        j["verdict"] = "nonunique";
    } else {
        auto in = load_curve(cfg);
        auto rep = nonuniq::uniqueness_verdict(in.c, cfg.maxden);
        j["curve"] = curve_json(in.c);
        j["verdict"] = nonuniq::verdict_name(rep.verdict);
        j["rotation"] = {{"m", rep.m}, {"n", rep.n}, {"residual", rep.residual}, {"max_denominator", cfg.maxden}};
        j["note"] = rep.note;
        w = rep.witness;
        if (w) {
            auto tag = curve::classify(in.c);
            k = curve::parameterize(tag).modulus.k;
            if (cfg.level != 1) w = nonuniq::build_solution(tag, john::periodicity_criterion(tag, cfg.maxden), cfg.level);
        }
    }
    if (w) {
        json wj = witness_json(*w, k);
        j["witness"] = {{"multiplier", w->multiplier}, {"residual", w->residual}, {"samples", w->samples}, {"tol", 1e-9}};
        if (!cfg.emit.empty()) {
            json doc{{"schema", schema}};
            doc.update(wj);
            write_file(cfg.emit, doc.dump(2) + "\n");
            j["witness"]["emitted"] = cfg.emit;
        } else {
            j["witness"] = wj;
        }
    }
    return j;
}

json cmd_toda(const Config& cfg)
{
    physics::TodaParams tp;
    tp.wdata = elliptic::WeierstrassData::from_invariants(cfg.g2, cfg.g3);
    tp.omega = cfg.omega;
    tp.p = cplx(cfg.p, cfg.p_im);
    if (cfg.period_N > 0) {
        if (cfg.period_m1 < 1 || cfg.period_m1 >= cfg.period_N) throw invalid("InvalidWinding", "1 <= m1 < N");
        tp.p = 2.0 * tp.wdata.omega1 * double(cfg.period_m1) / double(cfg.period_N);
    }
    tp.r = cfg.r_given ? cplx(cfg.r_re, cfg.r_im) : tp.wdata.omega3;
    tp.lambda = cfg.lambda;

    json j{{"g2", cfg.g2},
           {"g3", cfg.g3},
           {"omega1", cplx_json(tp.wdata.omega1)},
           {"omega3", cplx_json(tp.wdata.omega3)},
           {"omega", cfg.omega},
           {"p", cplx_json(tp.p)},
           {"r", cplx_json(tp.r)},
           {"lambda", cfg.lambda}};

    std::ostringstream csv;
    csv.precision(17);
    csv << "step,t,n,b_re,b_im,u_re,u_im\n";
    for (int s = 0; s <= cfg.steps; ++s) {
        double t = cfg.t0 + s * cfg.dt;
        for (int n = cfg.n0; n <= cfg.n1; ++n) {
            auto st = physics::toda_eval(tp, n, t);
            csv << s << ',' << t << ',' << n << ',' << st.b.real() << ',' << st.b.imag() << ',' << st.u.real() << ','
                << st.u.imag() << '\n';
        }
    }
    if (!cfg.csv.empty()) {
        write_file(cfg.csv, csv.str());
        j["csv"] = cfg.csv;
    }

    auto r = physics::toda_verify(tp, cfg.n0, cfg.n1, cfg.t0, cfg.h);
    j["equations"] = {{"identity", "db_n/dt = u_(n+1) - u_n, du_n/dt = u_n (b_n - b_(n-1))"},
                      {"h", cfg.h},
                      {"residual_b", r.b},
                      {"residual_u", r.u},
                      {"tol", 1e-6},
                      {"forms", r.forms},
                      {"forms_tol", 1e-10},
                      {"half_period", r.half_period}};
    auto r1 = physics::toda_verify(tp, cfg.n0, cfg.n1, cfg.t0, 1e-2);
    auto r2 = physics::toda_verify(tp, cfg.n0, cfg.n1, cfg.t0, 5e-3);
    j["convergence"] = {{"h", {1e-2, 5e-3}},
                        {"residual", {std::max(r1.b, r1.u), std::max(r2.b, r2.u)}},
                        {"ratio", std::max(r1.b, r1.u) / std::max(r2.b, r2.u)},
                        {"expected", 4}};
    if (cfg.period_N > 0) {
        double worst = 0;
        for (int n = cfg.n0; n <= cfg.n1; ++n) {
            auto a = physics::toda_eval(tp, n, cfg.t0), b = physics::toda_eval(tp, n + cfg.period_N, cfg.t0);
            worst = std::max(worst, std::abs(a.u - b.u));
        }
        j["lattice_period"] = {{"N", cfg.period_N}, {"m1", cfg.period_m1}, {"residual", worst}, {"tol", 1e-8}};
    }
    try {
        auto pp = physics::toda_phase_portrait(tp, 64);
        j["phase_portrait"] = {{"samples", 64},
                               {"fit", curve_json(pp.fit.c)},
                               {"residual", pp.fit.residual},
                               {"tol", 1e-7},
                               {"symmetry", pp.fit.symmetry},
                               {"sigma_ratio", pp.fit.sigma_ratio},
                               {"wp_distance", pp.wp_distance}};
    } catch (const Error& e) {
        if (e.name() != "ComplexPortrait" && e.name() != "RankDeficientFit") throw;
        j["phase_portrait"] = {{"note", e.what()}};
    }
    return j;
}

json cmd_xy(const Config& cfg)
{
    json j{{"j", cfg.j}};
    double W = cfg.W;
    int N = cfg.N;
    bool closed = std::isnan(W);
    if (closed) {
        auto cl = physics::xy_closure(cfg.j, N, cfg.m1);
        W = cl.W;
        j["closure"] = {{"N", N}, {"m1", cfg.m1}, {"k", cl.k}, {"q", cl.q}};
    }
    auto ch = physics::xy_static(cfg.j, W, N, cfg.theta);
    double wdev = 0;
    for (double v : ch.integral_values()) wdev = std::max(wdev, std::abs(v - W));
    j["W"] = W;
    j["N"] = N;
    j["mode"] = ch.mode;
    j["staggered"] = ch.staggered;
    j["k"] = ch.k;
    j["q"] = ch.q;
    j["stationarity"] = {{"identity", "r_n x J (r_(n-1) + r_(n+1)) = 0"}, {"residual", ch.stationarity_residual()}, {"tol", 1e-9}};
    j["integral"] = {{"identity", "x_n x_(n+1) + y_n y_(n+1) / j = W"}, {"residual", wdev}, {"tol", 1e-10}};
    j["norm"] = {{"residual", ch.norm_defect()}, {"tol", 1e-12}};
    if (closed) j["closure"]["residual"] = ch.closure_defect(), j["closure"]["tol"] = 1e-8;
    auto eb = physics::xy_eb_curve(cfg.j, W);
    double worst = 0;
    std::ostringstream csv;
    csv.precision(17);
    csv << "n,x,y,u\n";
    for (std::size_t n = 0; n < ch.spins.size(); ++n) {
        double u = physics::stereographic(ch.spins[n]);
        csv << n << ',' << ch.spins[n][0] << ',' << ch.spins[n][1] << ',' << u << '\n';
        if (n + 1 < ch.spins.size())
            worst = std::max(worst, std::abs(curve::residual(eb, u, physics::stereographic(ch.spins[n + 1]))));
    }
    j["godograph"] = {{"identity", "(u_n, u_(n+1)) on the Euler-Baxter curve"}, {"curve", curve_json(eb)}, {"residual", worst}, {"tol", 1e-10}};
    if (!cfg.csv.empty()) {
        write_file(cfg.csv, csv.str());
        j["csv"] = cfg.csv;
    }
    return j;
}

json crosscheck_case(std::uint64_t seed, int index, int maxN)
{
    std::seed_seq seq{seed, static_cast<std::uint64_t>(index)};
    std::mt19937_64 rng(seq);
    const int kind = 1 + index % 5;
    std::optional<int> target;
    if (index % 2 == 0) {
        // the two real components alternate in dispositions 4 and 5: even periods only
        std::vector<int> odd_ok{3, 4, 5, 6}, even_only{4, 6, 8};
        const auto& opts = kind >= 4 ? even_only : odd_ok;
        target = opts[std::uniform_int_distribution<std::size_t>(0, opts.size() - 1)(rng)];
    }
    json c{{"case", index}, {"kind", kind}, {"target", target ? json(*target) : json(nullptr)}};
    auto ps = poncelet::random_pair(rng, kind, target);
    if (!ps) {
        c["status"] = "skipped";
        return c;
    }
    try {
        auto ag = poncelet::three_way(ps->A, ps->B, maxN);
        c["status"] = "ok";
        c["geometric"] = ag.geometric ? json(*ag.geometric) : json(nullptr);
        c["john"] = ag.john ? json(*ag.john) : json(nullptr);
        std::optional<int> cay;
        for (std::size_t i = 0; i < ag.cayley.size() && !cay; ++i)
            if (ag.cayley[i]) cay = (int)i + 3;
        c["cayley"] = cay ? json(*cay) : json(nullptr);
        c["agree"] = ag.agree;
    } catch (const Error& e) {
        c["status"] = "filtered";
        c["reason"] = e.name();
    }
    return c;
}

json cmd_crosscheck(const Config& cfg)
{
    if (cfg.cases < 1) throw invalid("InvalidCases", "--cases >= 1");
    const int maxN = std::min(cfg.N, 12);
    int threads = cfg.threads > 0 ? cfg.threads : (int)std::max(1u, std::thread::hardware_concurrency());
    std::vector<json> results(cfg.cases);
    for (int base = 0; base < cfg.cases; base += threads) {
        std::vector<std::future<json>> batch;
        for (int i = base; i < std::min(cfg.cases, base + threads); ++i)
            batch.push_back(std::async(std::launch::async, crosscheck_case, cfg.seed, i, maxN));
        for (int i = base; i < std::min(cfg.cases, base + threads); ++i) results[i] = batch[i - base].get();
    }
    int ok = 0, agree = 0, skipped = 0, filtered = 0;
    for (const auto& r : results) {
        if (r["status"] == "ok") {
            ++ok;
            if (r["agree"].get<bool>()) ++agree;
        } else if (r["status"] == "skipped") {
            ++skipped;
        } else {
            ++filtered;
        }
    }
    return {{"identity", "Poncelet period, John-orbit period and Cayley verdicts agree"},
            {"seed", cfg.seed},
            {"max_N", maxN},
            {"summary", {{"cases", cfg.cases}, {"checked", ok}, {"agree", agree}, {"skipped", skipped}, {"filtered", filtered}}},
            {"all_agree", ok > 0 && agree == ok},
            {"cases", results}};
}

// --- option wiring -----------------------------------------------------------------

void curve_opts(CLI::App* s, Config& c)
{
    s->add_option("--curve-json", c.curve_json, "curve JSON {\"a\": [[...],[...],[...]]}");
    s->add_option("--curve", c.curve_inline, "a00,a01,a02,a10,...,a22 (row i = x-degree)");
    s->add_option("--eb", c.eb, "Euler-Baxter a,b,c");
}

void conic_opts(CLI::App* s, Config& c)
{
    s->add_option("--conic-a", c.conic_a, "tangent conic JSON {\"M\": ...}");
    s->add_option("--conic-b", c.conic_b, "vertex conic JSON");
    s->add_option("--circles", c.circles, "r,R[,d]: inner circle at (d, 0), outer at the origin");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Config cfg;
    CLI::App app{"biquadratic curves, John maps, Poncelet closure, Pell-Abel and elliptic chains"};
    app.require_subcommand(1);
    app.add_flag("--exact", cfg.exact, "rational backend where available");
    app.add_option("--maxden", cfg.maxden, "denominator bound for rotation numbers")->check(CLI::PositiveNumber);
    app.add_option("--tol-rational", cfg.tol_rational)->check(CLI::PositiveNumber);
    app.add_option("--tol-on-curve", cfg.tol_on_curve)->check(CLI::PositiveNumber);
    app.add_option("--tol-period", cfg.tol_period)->check(CLI::PositiveNumber);
    app.add_option("--tol-cayley", cfg.tol_cayley)->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed);
    app.fallthrough();

    auto* analyze = app.add_subcommand("analyze", "classify a curve and decide its rotation number");
    curve_opts(analyze, cfg);
    analyze->add_option("--max-iter", cfg.max_iter);
    analyze->add_option("--x", cfg.x);
    analyze->add_option("--y", cfg.y);

    auto* orbit = app.add_subcommand("john-orbit", "iterate the John map");
    curve_opts(orbit, cfg);
    orbit->add_option("--x", cfg.x);
    orbit->add_option("--y", cfg.y);
    orbit->add_option("--max-iter", cfg.max_iter);
    orbit->add_option("--csv", cfg.csv);

    auto* ponc = app.add_subcommand("poncelet", "geometric Poncelet iteration");
    conic_opts(ponc, cfg);
    ponc->add_option("--N", cfg.N, "largest period searched");
    ponc->add_option("--start", cfg.start, "parameter of the first tangency point on A");
    ponc->add_option("--csv", cfg.csv);
    ponc->add_option("--svg", cfg.svg);

    auto* cay = app.add_subcommand("cayley", "Cayley closure test for period N");
    conic_opts(cay, cfg);
    cay->add_option("--N", cfg.N)->required();

    auto* bic = app.add_subcommand("bicentric", "bicentric polygon relations");
    bic->add_option("--R", cfg.R);
    bic->add_option("--r", cfg.r);
    bic->add_option("--d", cfg.d);
    bic->add_option("--n", cfg.n);

    auto* pa = app.add_subcommand("pell-abel", "polynomial Pell equation for a quartic");
    pa->add_option("--quartic", cfg.quartic, "descending coefficients")->required();
    pa->add_option("--max-deg", cfg.max_deg, "largest deg Q searched");
    pa->add_option("--gamma-k", cfg.gamma_k);
    pa->add_flag("--rationalize", cfg.rationalize, "accept decimal coefficients");

    auto* mal = app.add_subcommand("malyshev", "Hankel determinants of sqrt(R)");
    mal->add_option("--quartic", cfg.quartic)->required();
    mal->add_option("--k", cfg.gamma_k);
    mal->add_flag("--rationalize", cfg.rationalize);

    auto* dir = app.add_subcommand("dirichlet", "separated solutions vanishing on a curve");
    curve_opts(dir, cfg);
    dir->add_option("--ellipse", cfg.ellipse, "M/N: the ellipse with eps = pi M / N");
    dir->add_option("--level", cfg.level);
    dir->add_option("--emit", cfg.emit, "witness JSON path");

    auto* toda = app.add_subcommand("toda", "elliptic Toda wave");
    toda->add_option("--g2", cfg.g2);
    toda->add_option("--g3", cfg.g3);
    toda->add_option("--p", cfg.p);
    toda->add_option("--p-im", cfg.p_im);
    toda->add_option("--omega", cfg.omega);
    auto* ropt = toda->add_option("--r", cfg.r_re, "phase; defaults to omega3");
    auto* riopt = toda->add_option("--r-im", cfg.r_im);
    toda->add_option("--lambda", cfg.lambda);
    toda->add_option("--t0", cfg.t0);
    toda->add_option("--dt", cfg.dt);
    toda->add_option("--steps", cfg.steps);
    toda->add_option("--n0", cfg.n0);
    toda->add_option("--n1", cfg.n1);
    toda->add_option("--fd-step", cfg.h, "central-difference step")->check(CLI::PositiveNumber);
    toda->add_option("--period-N", cfg.period_N, "set p = 2 omega1 m1 / N");
    toda->add_option("--m1", cfg.period_m1);
    toda->add_option("--csv", cfg.csv);

    auto* xy = app.add_subcommand("xy", "static classical XY chain");
    xy->add_option("--j", cfg.j);
    xy->add_option("--N", cfg.N);
    xy->add_option("--m1", cfg.m1);
    xy->add_option("--W", cfg.W, "integral; omit to close the chain with winding m1 / N");
    xy->add_option("--theta", cfg.theta);
    xy->add_option("--csv", cfg.csv);

    auto* cc = app.add_subcommand("crosscheck", "three-way Poncelet / John / Cayley agreement");
    cc->add_option("--cases", cfg.cases);
    cc->add_option("--N", cfg.N, "largest period (<= 12)");
    cc->add_option("--threads", cfg.threads);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::InvalidInput);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.r_given = ropt->count() > 0 || riopt->count() > 0;

    json report{{"schema", schema}, {"command", cfg.command}};
    int code = 0;
    try {
        json body;
        if (cfg.command == "analyze") body = cmd_analyze(cfg);
        else if (cfg.command == "john-orbit") body = cmd_john_orbit(cfg);
        else if (cfg.command == "poncelet") body = cmd_poncelet(cfg);
        else if (cfg.command == "cayley") body = cmd_cayley(cfg);
        else if (cfg.command == "bicentric") body = cmd_bicentric(cfg);
        else if (cfg.command == "pell-abel") body = cmd_pell_abel(cfg);
        else if (cfg.command == "malyshev") body = cmd_malyshev(cfg);
        else if (cfg.command == "dirichlet") body = cmd_dirichlet(cfg);
        else if (cfg.command == "toda") body = cmd_toda(cfg);
        else if (cfg.command == "xy") body = cmd_xy(cfg);
        else body = cmd_crosscheck(cfg);
        if (body.contains("exit_code")) {
            code = body["exit_code"].get<int>();
            body.erase("exit_code");
        }
        report.update(body);
    } catch (const Error& e) {
        report["error"] = {{"name", e.name()}, {"message", e.what()}};
        code = static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        report["error"] = {{"name", "InternalError"}, {"message", e.what()}};
        code = static_cast<int>(ErrorKind::Numerical);
    }
    out << report.dump(2) << "\n";
    if (code != 0 && report.contains("error")) err << report["error"]["message"].get<std::string>() << "\n";
    return code;
}

} // namespace biquad::cli
