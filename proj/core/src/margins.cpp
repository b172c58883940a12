#include "piid/margins.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "piid/errors.hpp"
#include "piid/quadrature.hpp"
#include "piid/special_functions.hpp"

namespace piid {

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi) = E|Z|
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------------------
// BorelSet

BorelSet::BorelSet(std::vector<Interval> parts) : parts_(std::move(parts)) {
    for (const Interval& iv : parts_) {
        if (!(iv.lo <= iv.hi)) throw std::invalid_argument("BorelSet: interval with lo > hi");
    }
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    for (std::size_t i = 1; i < parts_.size(); ++i) {
        const bool prev_point = parts_[i - 1].is_point();
        const double prev_end = parts_[i - 1].hi;
        if (parts_[i].lo < prev_end || (prev_point && parts_[i].lo == prev_end))
            throw std::invalid_argument("BorelSet: overlapping intervals");
    }
}

BorelSet BorelSet::points(std::span<const double> atoms) {
    std::vector<Interval> parts;
    parts.reserve(atoms.size());
    for (double a : atoms) parts.push_back(Interval{a, a});
    return BorelSet(std::move(parts));
}

BorelSet BorelSet::interval(double lo, double hi) { return BorelSet({Interval{lo, hi}}); }

bool BorelSet::contains(double x) const {
    for (const Interval& iv : parts_) {
        if (iv.contains(x)) return true;
        if (x < iv.lo) break;
    }
    return false;
}

// Complement of `set` within [lo, hi], as a list of quadrature ranges.
// Point parts have zero measure and are ignored.
static std::vector<Interval> complement_ranges(const BorelSet& set, double lo, double hi) {
    std::vector<Interval> out;
    double cursor = lo;
    for (const Interval& iv : set.parts()) {
        if (iv.is_point()) continue;
        const double piece_lo = std::max(iv.lo, lo);
        const double piece_hi = std::min(iv.hi, hi);
        if (piece_lo >= piece_hi) continue;
        if (piece_lo > cursor) out.push_back(Interval{cursor, piece_lo});
        cursor = std::max(cursor, piece_hi);
    }
    if (cursor < hi) out.push_back(Interval{cursor, hi});
    return out;
}

static std::vector<Interval> set_ranges(const BorelSet& set, double lo, double hi) {
    std::vector<Interval> out;
    for (const Interval& iv : set.parts()) {
        if (iv.is_point()) continue;
        const double piece_lo = std::max(iv.lo, lo);
        const double piece_hi = std::min(iv.hi, hi);
        if (piece_lo < piece_hi) out.push_back(Interval{piece_lo, piece_hi});
    }
    return out;
}

// ---------------------------------------------------------------------------
// MarginSpec

static void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

MarginSpec MarginSpec::two_point_extreme(int ell) {
    require(ell >= 2, "two_point_extreme: ell must be >= 2");
    return MarginSpec(MarginKind::TwoPointExtreme, TwoPointParams{ell});
}

MarginSpec MarginSpec::symmetric_four_point(int ell) {
    require(ell >= 2, "symmetric_four_point: ell must be >= 2");
    return MarginSpec(MarginKind::SymmetricFourPoint, FourPointParams{ell});
}

MarginSpec MarginSpec::symmetric_uniform(int ell) {
    require(ell >= 2, "symmetric_uniform: ell must be >= 2");
    return MarginSpec(MarginKind::SymmetricUniform, UniformParams{ell});
}

MarginSpec MarginSpec::gaussian_mixture(int ell, double sigma) {
    require(ell >= 2, "gaussian_mixture: ell must be >= 2");
    require(sigma > 0.0 && std::isfinite(sigma), "gaussian_mixture: sigma must be positive");
    return MarginSpec(MarginKind::GaussianMixture, GaussianMixtureParams{ell, sigma});
}

MarginSpec MarginSpec::normal(double mu, double sigma) {
    require(std::isfinite(mu), "normal: mu must be finite");
    require(sigma > 0.0 && std::isfinite(sigma), "normal: sigma must be positive");
    return MarginSpec(MarginKind::Normal, NormalParams{mu, sigma});
}

MarginSpec MarginSpec::log_normal(double beta) {
    require(beta > 0.0 && std::isfinite(beta), "log_normal: beta must be positive");
    return MarginSpec(MarginKind::LogNormal, LogNormalParams{beta});
}

MarginSpec MarginSpec::custom(CustomDensityMargin margin) {
    require(margin.ell >= 2, "custom: ell must be >= 2");
    require(static_cast<bool>(margin.density), "custom: density required");
    require(static_cast<bool>(margin.sampler), "custom: sampler required");
    require(!margin.set_a.empty(), "custom: set A required");
    return MarginSpec(MarginKind::Custom, std::move(margin));
}

MarginSpec MarginSpec::custom(CustomDiscreteMargin margin) {
    require(margin.ell >= 2, "custom: ell must be >= 2");
    require(!margin.atoms.empty(), "custom: atoms required");
    require(margin.atoms.size() == margin.weights.size(), "custom: atoms/weights size mismatch");
    require(!margin.set_a.empty(), "custom: set A required");
    for (std::size_t i = 1; i < margin.atoms.size(); ++i)
        require(margin.atoms[i - 1] < margin.atoms[i], "custom: atoms must be increasing");
    double total = 0.0;
    for (double w : margin.weights) {
        require(w > 0.0, "custom: weights must be positive");
        total += w;
    }
    require(std::fabs(total - 1.0) <= 1e-12, "custom: weights must sum to 1");
    return MarginSpec(MarginKind::Custom, std::move(margin));
}

int MarginSpec::ell() const {
    switch (kind_) {
        case MarginKind::TwoPointExtreme: return std::get<TwoPointParams>(params_).ell;
        case MarginKind::SymmetricFourPoint: return std::get<FourPointParams>(params_).ell;
        case MarginKind::SymmetricUniform: return std::get<UniformParams>(params_).ell;
        case MarginKind::GaussianMixture: return std::get<GaussianMixtureParams>(params_).ell;
        case MarginKind::Normal: return 2;
        case MarginKind::LogNormal: return 2;
        case MarginKind::Custom:
            if (const auto* d = std::get_if<CustomDensityMargin>(&params_)) return d->ell;
            return std::get<CustomDiscreteMargin>(params_).ell;
    }
    return 2;
}

std::string MarginSpec::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case MarginKind::TwoPointExtreme:
            os << "twopoint(ell=" << ell() << ")"; break;
        case MarginKind::SymmetricFourPoint:
            os << "fourpoint(ell=" << ell() << ")"; break;
        case MarginKind::SymmetricUniform:
            os << "uniform(ell=" << ell() << ")"; break;
        case MarginKind::GaussianMixture:
            os << "gaussmix(ell=" << ell()
               << ",sigma=" << std::get<GaussianMixtureParams>(params_).sigma << ")";
            break;
        case MarginKind::Normal: {
            const auto& p = std::get<NormalParams>(params_);
            os << "normal(mu=" << p.mu << ",sigma=" << p.sigma << ")";
            break;
        }
        case MarginKind::LogNormal:
            os << "lognormal(beta=" << std::get<LogNormalParams>(params_).beta << ")"; break;
        case MarginKind::Custom:
            os << "custom(ell=" << ell() << ")"; break;
    }
    return os.str();
}

nlohmann::json MarginSpec::to_json() const {
    nlohmann::json doc;
    switch (kind_) {
        case MarginKind::TwoPointExtreme:
            doc = {{"kind", "twopoint"}, {"params", {{"ell", ell()}}}};
            break;
        case MarginKind::SymmetricFourPoint:
            doc = {{"kind", "fourpoint"}, {"params", {{"ell", ell()}}}};
            break;
        case MarginKind::SymmetricUniform:
            doc = {{"kind", "uniform"}, {"params", {{"ell", ell()}}}};
            break;
        case MarginKind::GaussianMixture: {
            const auto& p = std::get<GaussianMixtureParams>(params_);
            doc = {{"kind", "gaussmix"}, {"params", {{"ell", p.ell}, {"sigma", p.sigma}}}};
            break;
        }
        case MarginKind::Normal: {
            const auto& p = std::get<NormalParams>(params_);
            doc = {{"kind", "normal"}, {"params", {{"mu", p.mu}, {"sigma", p.sigma}}}};
            break;
        }
        case MarginKind::LogNormal: {
            const auto& p = std::get<LogNormalParams>(params_);
            doc = {{"kind", "lognormal"}, {"params", {{"beta", p.beta}}}};
            break;
        }
        case MarginKind::Custom: {
            const auto* d = std::get_if<CustomDiscreteMargin>(&params_);
            if (d == nullptr)
                throw std::invalid_argument(
                    "MarginSpec::to_json: density-based custom margins are not serializable");
            nlohmann::json set = nlohmann::json::array();
            for (const Interval& iv : d->set_a.parts()) {
                if (iv.is_point())
                    set.push_back(iv.lo);
                else
                    set.push_back(nlohmann::json::array({iv.lo, iv.hi}));
            }
            doc = {{"kind", "custom"},
                   {"params",
                    {{"ell", d->ell}, {"atoms", d->atoms}, {"weights", d->weights}, {"set", set}}}};
            break;
        }
    }
    return doc;
}

MarginSpec MarginSpec::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("kind"))
        throw std::invalid_argument("margin JSON: expected {\"kind\": ..., \"params\": {...}}");
    const std::string kind = doc.at("kind").get<std::string>();
    const nlohmann::json params = doc.value("params", nlohmann::json::object());
    auto get_ell = [&params]() { return params.value("ell", 2); };
    if (kind == "twopoint") return two_point_extreme(get_ell());
    if (kind == "fourpoint") return symmetric_four_point(get_ell());
    if (kind == "uniform") return symmetric_uniform(get_ell());
    if (kind == "gaussmix") return gaussian_mixture(get_ell(), params.value("sigma", 0.1));
    if (kind == "normal") return normal(params.value("mu", 0.0), params.value("sigma", 1.0));
    if (kind == "lognormal") return log_normal(params.value("beta", 1.0));
    if (kind == "custom") {
        CustomDiscreteMargin margin;
        margin.ell = get_ell();
        if (!params.contains("atoms") || !params.contains("weights") || !params.contains("set"))
            throw std::invalid_argument(
                "custom margin JSON requires atoms, weights and set (finite-atom margins only; "
                "density margins are programmatic)");
        margin.atoms = params.at("atoms").get<std::vector<double>>();
        margin.weights = params.at("weights").get<std::vector<double>>();
        std::vector<Interval> parts;
        for (const auto& entry : params.at("set")) {
            if (entry.is_array()) {
                if (entry.size() != 2)
                    throw std::invalid_argument("custom margin JSON: set intervals are [lo, hi]");
                parts.push_back(Interval{entry[0].get<double>(), entry[1].get<double>()});
            } else {
                const double point = entry.get<double>();
                parts.push_back(Interval{point, point});
            }
        }
        margin.set_a = BorelSet(std::move(parts));
        return custom(std::move(margin));
    }
    throw std::invalid_argument("margin JSON: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Moment bundles per kind

namespace {

struct MomentBundle {
    int ell;
    double mu_u, mu_v, sigma_u, sigma_v, mu, sigma;
    double prob_a;  // measured P(W in A); equals 1/ell for built-ins
};

MomentBundle two_point_moments(int ell) {
    const double q = 1.0 / ell;
    const double root = std::sqrt(q * (1.0 - q));
    MomentBundle m{};
    m.ell = ell;
    m.mu_v = 1.0;
    m.mu_u = -1.0;
    m.sigma_u = m.sigma_v = 0.0;
    m.mu = 2.0 * q - 1.0;
    m.sigma = 2.0 * root;
    m.prob_a = q;
    return m;
}

MomentBundle four_point_moments(int ell) {
    const double q = 1.0 / ell;
    MomentBundle m{};
    m.ell = ell;
    m.mu_u = m.mu_v = m.mu = 0.0;
    m.sigma_v = 1.0;
    m.sigma_u = 2.0;
    m.sigma = std::sqrt(4.0 - 3.0 * q);
    m.prob_a = q;
    return m;
}

MomentBundle uniform_moments(int ell) {
    const double q = 1.0 / ell;
    MomentBundle m{};
    m.ell = ell;
    m.mu_u = m.mu_v = m.mu = 0.0;
    m.sigma_v = q / std::sqrt(3.0);
    m.sigma_u = std::sqrt((1.0 + q + q * q) / 3.0);
    m.sigma = 1.0 / std::sqrt(3.0);
    m.prob_a = q;
    return m;
}

MomentBundle normal_moments(const NormalParams& p) {
    MomentBundle m{};
    m.ell = 2;
    m.mu = p.mu;
    m.sigma = p.sigma;
    m.mu_v = p.mu + p.sigma * kSqrt2OverPi;
    m.mu_u = p.mu - p.sigma * kSqrt2OverPi;
    m.sigma_u = m.sigma_v = p.sigma * std::sqrt(1.0 - 2.0 / M_PI);
    m.prob_a = 0.5;
    return m;
}

MomentBundle log_normal_moments(const LogNormalParams& p) {
    const double s = std::sqrt(p.beta);
    const double half_exp = std::exp(0.5 * p.beta);   // E[W]
    const double full_exp = half_exp * half_exp;      // exp(beta)
    const double erfc_half = std::erfc(std::sqrt(0.5 * p.beta));
    MomentBundle m{};
    m.ell = 2;
    m.mu = half_exp;
    m.sigma = half_exp * std::sqrt(std::expm1(p.beta));
    m.mu_v = half_exp * (2.0 - erfc_half);            // exp(beta/2)(1 + erf(sqrt(beta/2)))
    m.mu_u = half_exp * erfc_half;
    // E[V^2] = 2 exp(2 beta) Phi(2 sqrt(beta)), E[U^2] = 2 exp(2 beta) Phi(-2 sqrt(beta))
    const double ev2 = 2.0 * full_exp * full_exp * norm_cdf(2.0 * s);
    const double eu2 = 2.0 * full_exp * full_exp * norm_cdf(-2.0 * s);
    m.sigma_v = std::sqrt(std::max(0.0, ev2 - m.mu_v * m.mu_v));
    m.sigma_u = std::sqrt(std::max(0.0, eu2 - m.mu_u * m.mu_u));
    m.prob_a = 0.5;
    return m;
}

struct GaussianMixtureLaw {
    int ell;
    double sigma;
    double mu1, mu2;  // component means -1/ell and 1 - 1/ell
    double w1, w2;    // component weights 1 - 1/ell and 1/ell
    double threshold; // w_ell with P(W >= w_ell) = 1/ell

    double cdf(double x) const {
        return w1 * norm_cdf((x - mu1) / sigma) + w2 * norm_cdf((x - mu2) / sigma);
    }
    double pdf(double x) const {
        return (w1 * norm_pdf((x - mu1) / sigma) + w2 * norm_pdf((x - mu2) / sigma)) / sigma;
    }
};

GaussianMixtureLaw solve_gaussian_mixture(const GaussianMixtureParams& p) {
    GaussianMixtureLaw law{};
    law.ell = p.ell;
    law.sigma = p.sigma;
    const double q = 1.0 / p.ell;
    law.mu1 = -q;
    law.mu2 = 1.0 - q;
    law.w1 = 1.0 - q;
    law.w2 = q;
    // Bracketed bisection for P(W >= w) = 1/ell, i.e. cdf(w) = 1 - 1/ell.
    // For small sigma the cdf has a flat stretch at the target between the
    // two components; any point of it is a valid threshold, so plain
    // bisection (no derivative step) is the right tool.
    const double target = 1.0 - q;
    double lo = law.mu1 - 50.0 * p.sigma - 1.0;
    double hi = law.mu2 + 50.0 * p.sigma + 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (law.cdf(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    law.threshold = 0.5 * (lo + hi);
    return law;
}

MomentBundle gaussian_mixture_moments(const GaussianMixtureLaw& law) {
    const double q = law.w2;
    const double s = law.sigma;
    const double w = law.threshold;
    const double a1 = (w - law.mu1) / s;
    const double a2 = (w - law.mu2) / s;
    // E[W 1{W >= w}] and E[W^2 1{W >= w}] for a normal component N(mu, s^2):
    //   E[X 1{X>=w}]  = mu Psi(a) + s phi(a),          a = (w - mu)/s
    //   E[X^2 1{X>=w}] = (mu^2 + s^2) Psi(a) + s (mu + w) phi(a)
    const double ev1 = law.w1 * (law.mu1 * norm_sf(a1) + s * norm_pdf(a1)) +
                       law.w2 * (law.mu2 * norm_sf(a2) + s * norm_pdf(a2));
    const double ev2 = law.w1 * ((law.mu1 * law.mu1 + s * s) * norm_sf(a1) +
                                 s * (law.mu1 + w) * norm_pdf(a1)) +
                       law.w2 * ((law.mu2 * law.mu2 + s * s) * norm_sf(a2) +
                                 s * (law.mu2 + w) * norm_pdf(a2));
    const double ew2 = s * s + q * (1.0 - q);  // E[W] = 0
    MomentBundle m{};
    m.ell = law.ell;
    m.mu = 0.0;
    m.sigma = std::sqrt(ew2);
    m.mu_v = ev1 / q;
    m.mu_u = -ev1 / (1.0 - q);
    m.sigma_v = std::sqrt(std::max(0.0, ev2 / q - m.mu_v * m.mu_v));
    m.sigma_u = std::sqrt(std::max(0.0, (ew2 - ev2) / (1.0 - q) - m.mu_u * m.mu_u));
    m.prob_a = q;
    return m;
}

// Numeric moments of a density-based custom margin.
struct CustomDensityMoments {
    MomentBundle bundle;
    bool finite = true;
};

CustomDensityMoments custom_density_moments(const CustomDensityMargin& c) {
    const auto& f = c.density;
    auto piece_sum = [&](const std::vector<Interval>& pieces,
                         const std::function<double(double)>& g) {
        double total = 0.0;
        for (const Interval& iv : pieces) total += integrate(g, iv.lo, iv.hi, 1e-12).value;
        return total;
    };
    const std::vector<Interval> in_a = set_ranges(c.set_a, c.support_lo, c.support_hi);
    const std::vector<Interval> off_a = complement_ranges(c.set_a, c.support_lo, c.support_hi);

    const double prob_a = piece_sum(in_a, f);
    const double prob_ac = piece_sum(off_a, f);
    auto xf = [&f](double x) { return x * f(x); };
    auto x2f = [&f](double x) { return x * x * f(x); };
    const double ev1 = piece_sum(in_a, xf);
    const double ev2 = piece_sum(in_a, x2f);
    const double eu1 = piece_sum(off_a, xf);
    const double eu2 = piece_sum(off_a, x2f);

    CustomDensityMoments out{};
    MomentBundle& m = out.bundle;
    m.ell = c.ell;
    m.prob_a = prob_a;
    m.mu_v = ev1 / prob_a;
    m.mu_u = eu1 / prob_ac;
    m.sigma_v = std::sqrt(std::max(0.0, ev2 / prob_a - m.mu_v * m.mu_v));
    m.sigma_u = std::sqrt(std::max(0.0, eu2 / prob_ac - m.mu_u * m.mu_u));
    m.mu = ev1 + eu1;
    m.sigma = std::sqrt(std::max(0.0, ev2 + eu2 - m.mu * m.mu));
    out.finite = std::isfinite(ev2 + eu2) && std::isfinite(m.mu);
    return out;
}

struct DiscreteSplit {
    MomentBundle bundle;
    std::vector<double> atoms_v, cum_v;  // conditional law on A
    std::vector<double> atoms_u, cum_u;  // conditional law on A^c
};

DiscreteSplit custom_discrete_moments(const CustomDiscreteMargin& c) {
    DiscreteSplit out{};
    MomentBundle& m = out.bundle;
    m.ell = c.ell;
    double pa = 0, pu = 0, ev1 = 0, ev2 = 0, eu1 = 0, eu2 = 0;
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
        const double x = c.atoms[i];
        const double w = c.weights[i];
        if (c.set_a.contains(x)) {
            pa += w;
            ev1 += w * x;
            ev2 += w * x * x;
            out.atoms_v.push_back(x);
            out.cum_v.push_back(pa);
        } else {
            pu += w;
            eu1 += w * x;
            eu2 += w * x * x;
            out.atoms_u.push_back(x);
            out.cum_u.push_back(pu);
        }
    }
    m.prob_a = pa;
    m.mu_v = pa > 0 ? ev1 / pa : 0.0;
    m.mu_u = pu > 0 ? eu1 / pu : 0.0;
    m.sigma_v = pa > 0 ? std::sqrt(std::max(0.0, ev2 / pa - m.mu_v * m.mu_v)) : 0.0;
    m.sigma_u = pu > 0 ? std::sqrt(std::max(0.0, eu2 / pu - m.mu_u * m.mu_u)) : 0.0;
    m.mu = ev1 + eu1;
    m.sigma = std::sqrt(std::max(0.0, ev2 + eu2 - m.mu * m.mu));
    return out;
}

double draw_from_atoms(const std::vector<double>& atoms, const std::vector<double>& cum,
                       RngStream& rng) {
    const double u = rng.uniform01() * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t idx = std::min<std::size_t>(it - cum.begin(), atoms.size() - 1);
    return atoms[idx];
}

}  // namespace

// ---------------------------------------------------------------------------
// split / validate / r_of / check_weight_conditions

double SplitMargin::sample_w(RngStream& rng) const {
    return rng.uniform01() < 1.0 / ell_ ? sample_v_(rng) : sample_u_(rng);
}

SplitMargin::SplitMargin(SplitMarginInit init) {
    if (!(init.sigma > 0.0)) throw ZeroVarianceError("margin has zero variance");
    ell_ = init.ell;
    mu_u_ = init.mu_u;
    mu_v_ = init.mu_v;
    sigma_u_ = init.sigma_u;
    sigma_v_ = init.sigma_v;
    mu_ = init.mu;
    sigma_ = init.sigma;
    const double q = 1.0 / ell_;
    r_ = std::sqrt(q * (1.0 - q)) * (mu_v_ - mu_u_) / sigma_;
    set_a_ = std::move(init.set_a);
    sample_u_ = std::move(init.sample_u);
    sample_v_ = std::move(init.sample_v);
}

static SplitMargin make_split(const MomentBundle& m, BorelSet set_a,
                              std::function<double(RngStream&)> sample_u,
                              std::function<double(RngStream&)> sample_v) {
    SplitMarginInit init;
    init.ell = m.ell;
    init.mu_u = m.mu_u;
    init.mu_v = m.mu_v;
    init.sigma_u = m.sigma_u;
    init.sigma_v = m.sigma_v;
    init.mu = m.mu;
    init.sigma = m.sigma;
    init.set_a = std::move(set_a);
    init.sample_u = std::move(sample_u);
    init.sample_v = std::move(sample_v);
    return SplitMargin(std::move(init));
}

SplitMargin split(const MarginSpec& spec) {
    switch (spec.kind()) {
        case MarginKind::TwoPointExtreme: {
            const MomentBundle m = two_point_moments(spec.ell());
            return make_split(m, BorelSet::points(std::array{1.0}),
                              [](RngStream&) { return -1.0; }, [](RngStream&) { return 1.0; });
        }
        case MarginKind::SymmetricFourPoint: {
            const MomentBundle m = four_point_moments(spec.ell());
            return make_split(
                m, BorelSet::points(std::array{-1.0, 1.0}),
                [](RngStream& rng) { return rng.uniform01() < 0.5 ? -2.0 : 2.0; },
                [](RngStream& rng) { return rng.uniform01() < 0.5 ? -1.0 : 1.0; });
        }
        case MarginKind::SymmetricUniform: {
            const int ell = spec.ell();
            const double q = 1.0 / ell;
            const MomentBundle m = uniform_moments(ell);
            return make_split(
                m, BorelSet::interval(-q, q),
                [q](RngStream& rng) {
                    const double u = rng.uniform01();
                    return u < 0.5 ? -1.0 + 2.0 * u * (1.0 - q) : q + (2.0 * u - 1.0) * (1.0 - q);
                },
                [q](RngStream& rng) { return -q + 2.0 * q * rng.uniform01(); });
        }
        case MarginKind::Normal: {
            const auto& p = spec.params<NormalParams>();
            const MomentBundle m = normal_moments(p);
            const double mu = p.mu, sigma = p.sigma;
            return make_split(
                m, BorelSet::interval(mu, kInf),
                [mu, sigma](RngStream& rng) {
                    return mu + sigma * norm_quantile(0.5 * rng.uniform_open01());
                },
                [mu, sigma](RngStream& rng) {
                    return mu + sigma * norm_quantile(0.5 + 0.5 * rng.uniform_open01());
                });
        }
        case MarginKind::LogNormal: {
            const auto& p = spec.params<LogNormalParams>();
            const MomentBundle m = log_normal_moments(p);
            const double s = std::sqrt(p.beta);
            return make_split(
                m, BorelSet::interval(1.0, kInf),
                [s](RngStream& rng) {
                    return std::exp(s * norm_quantile(0.5 * rng.uniform_open01()));
                },
                [s](RngStream& rng) {
                    return std::exp(s * norm_quantile(0.5 + 0.5 * rng.uniform_open01()));
                });
        }
        case MarginKind::GaussianMixture: {
            const GaussianMixtureLaw law = solve_gaussian_mixture(spec.params<GaussianMixtureParams>());
            const MomentBundle m = gaussian_mixture_moments(law);
            const double q = law.w2;
            // Conditional inverse CDF by expanding bracket + bisection on the
            // mixture CDF; exact up to ~1e-14 in probability.
            auto invert = [law](double target, double lo, double hi) {
                for (int i = 0; i < 100; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (law.cdf(mid) < target)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            };
            const double w = law.threshold;
            auto sample_u = [law, invert, w, q](RngStream& rng) {
                const double target = rng.uniform_open01() * (1.0 - q);
                double lo = w - 1.0;
                while (law.cdf(lo) > target) lo = w + 2.0 * (lo - w) - 1.0;
                const double x = invert(target, lo, w);
                return std::min(x, std::nextafter(w, -kInf));
            };
            auto sample_v = [law, invert, w, q](RngStream& rng) {
                const double target = (1.0 - q) + rng.uniform_open01() * q;
                double hi = w + 1.0;
                while (law.cdf(hi) < target) hi = w + 2.0 * (hi - w) + 1.0;
                const double x = invert(target, w, hi);
                return std::max(x, w);
            };
            return make_split(m, BorelSet::interval(w, kInf), sample_u, sample_v);
        }
        case MarginKind::Custom:
            break;  // handled below
    }
    // Custom margins (dispatch on payload flavour).
    if (const auto* dens = spec.params_if<CustomDensityMargin>()) {
        const CustomDensityMoments cm = custom_density_moments(*dens);
        const double q = 1.0 / dens->ell;
        if (std::fabs(cm.bundle.prob_a - q) > kTauA)
            throw NonIntegerReciprocalError(cm.bundle.prob_a, dens->ell);
        const BorelSet set = dens->set_a;
        auto base = dens->sampler;
        // Rejection from the unconditional sampler; acceptance 1/ell and
        // 1 - 1/ell respectively.
        auto sample_v = [base, set](RngStream& rng) {
            while (true) {
                const double x = base(rng);
                if (set.contains(x)) return x;
            }
        };
        auto sample_u = [base, set](RngStream& rng) {
            while (true) {
                const double x = base(rng);
                if (!set.contains(x)) return x;
            }
        };
        return make_split(cm.bundle, dens->set_a, sample_u, sample_v);
    }
    const auto& disc = spec.params<CustomDiscreteMargin>();
    DiscreteSplit ds = custom_discrete_moments(disc);
    const double q = 1.0 / disc.ell;
    if (std::fabs(ds.bundle.prob_a - q) > kTauA)
        throw NonIntegerReciprocalError(ds.bundle.prob_a, disc.ell);
    auto atoms_v = std::make_shared<std::vector<double>>(std::move(ds.atoms_v));
    auto cum_v = std::make_shared<std::vector<double>>(std::move(ds.cum_v));
    auto atoms_u = std::make_shared<std::vector<double>>(std::move(ds.atoms_u));
    auto cum_u = std::make_shared<std::vector<double>>(std::move(ds.cum_u));
    return make_split(
        ds.bundle, disc.set_a,
        [atoms_u, cum_u](RngStream& rng) { return draw_from_atoms(*atoms_u, *cum_u, rng); },
        [atoms_v, cum_v](RngStream& rng) { return draw_from_atoms(*atoms_v, *cum_v, rng); });
}

bool ValidationReport::has(ValidationCode code) const {
    return std::any_of(findings.begin(), findings.end(),
                       [code](const ValidationFinding& f) { return f.code == code; });
}

ValidationReport validate(const MarginSpec& spec) {
    ValidationReport report;
    report.prob_a_target = 1.0 / spec.ell();

    MomentBundle m{};
    bool have_moments = false;
    switch (spec.kind()) {
        case MarginKind::TwoPointExtreme:
            m = two_point_moments(spec.ell());
            have_moments = true;
            break;
        case MarginKind::SymmetricFourPoint:
            m = four_point_moments(spec.ell());
            have_moments = true;
            break;
        case MarginKind::SymmetricUniform:
            m = uniform_moments(spec.ell());
            have_moments = true;
            break;
        case MarginKind::Normal:
            m = normal_moments(spec.params<NormalParams>());
            have_moments = true;
            break;
        case MarginKind::LogNormal:
            m = log_normal_moments(spec.params<LogNormalParams>());
            have_moments = true;
            break;
        case MarginKind::GaussianMixture:
            m = gaussian_mixture_moments(solve_gaussian_mixture(spec.params<GaussianMixtureParams>()));
            have_moments = true;
            break;
        case MarginKind::Custom:
            if (const auto* dens = spec.params_if<CustomDensityMargin>()) {
                const CustomDensityMoments cm = custom_density_moments(*dens);
                m = cm.bundle;
                if (!cm.finite)
                    report.findings.push_back(
                        {ValidationCode::NonFiniteVariance, "variance integral did not converge"});
            } else {
                m = custom_discrete_moments(spec.params<CustomDiscreteMargin>()).bundle;
            }
            have_moments = true;
            break;
    }

    if (have_moments) {
        report.prob_a = m.prob_a;
        report.prob_a_ok = std::fabs(m.prob_a - report.prob_a_target) <= kTauA;
        if (!report.prob_a_ok) {
            std::ostringstream os;
            os << "P(W in A) = " << m.prob_a << " differs from 1/" << spec.ell();
            report.findings.push_back({ValidationCode::NonIntegerReciprocal, os.str()});
        }
        report.variance_finite = std::isfinite(m.sigma) && !report.has(ValidationCode::NonFiniteVariance);
        if (report.variance_finite && !(m.sigma > 0.0))
            report.findings.push_back({ValidationCode::ZeroVariance, "margin variance is zero"});
        report.mu_u = m.mu_u;
        report.mu_v = m.mu_v;
        report.r_zero = std::fabs(m.mu_u - m.mu_v) <= kTauEq;
    }
    return report;
}

double r_of(const SplitMargin& s) {
    if (!(s.stddev() > 0.0)) throw ZeroVarianceError("r_of: sigma must be positive");
    const double q = 1.0 / s.ell();
    const double form1 = std::sqrt(q * (1.0 - q)) * (s.mu_v() - s.mu_u()) / s.stddev();
    const double form2 = (s.mu_v() - s.mean()) / (s.stddev() * std::sqrt(s.ell() - 1.0));
    // Both algebraic forms must agree; the tolerance scales with the moment
    // magnitudes so large location offsets do not trip it.
    const double scale =
        std::max(1.0, (std::fabs(s.mu_u()) + std::fabs(s.mu_v()) + std::fabs(s.mean())) / s.stddev());
    if (std::fabs(form1 - form2) > 1e-12 * scale)
        throw std::logic_error("r_of: the two algebraic forms of r disagree");
    return form1;
}

ConditionReport check_weight_conditions(std::span<const double> p, double w) {
    if (p.empty()) throw std::invalid_argument("check_weight_conditions: empty vector");
    double s1 = 0, s2 = 0, s3 = 0;
    for (double pi : p) {
        if (!(pi > 0.0 && pi < 1.0))
            throw std::invalid_argument("check_weight_conditions: p_i must lie in (0, 1)");
        s1 += pi;
        s2 += pi * pi;
        s3 += pi * pi * pi;
    }
    ConditionReport report;
    report.sum_residual = std::fabs(s1 - 1.0);
    report.square_residual = std::fabs(s2 - w);
    report.cube_residual = std::fabs(s3 - w * w);
    return report;
}

}  // namespace piid
