#include "piid/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace piid {

namespace {

using Kernel = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Panel {
    double a, b;
    double value;
    double err;
    bool operator<(const Panel& other) const { return err < other.err; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double half = 0.5 * (b - a);
    double err = 0.0;
    // max_depth = 0: a single non-adaptive GK15 panel. The reported error is
    // for the interval normalized to [-1, 1], so scale it back.
    const double value =
        Kernel::integrate([&f](double x) { return f(x); }, a, b, 0, 1e-3, &err);
    return Panel{a, b, value, err * half};
}

}  // namespace

IntegrationResult integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (a == b) return {0.0, 0.0};
    if (a > b) {
        IntegrationResult res = integrate(f, b, a, abs_tol);
        res.value = -res.value;
        return res;
    }

    // Map infinite ranges onto finite ones before panelizing.
    if (a == -inf && b == inf) {
        auto g = [&f](double t) {
            const double s = 1.0 - t * t;
            return f(t / s) * (1.0 + t * t) / (s * s);
        };
        return integrate(g, -1.0, 1.0, abs_tol);
    }
    if (b == inf) {
        auto g = [&f, a](double t) {
            const double s = 1.0 - t;
            return f(a + t / s) / (s * s);
        };
        return integrate(g, 0.0, 1.0, abs_tol);
    }
    if (a == -inf) {
        auto g = [&f, b](double t) {
            const double s = 1.0 - t;
            return f(b - t / s) / (s * s);
        };
        return integrate(g, 0.0, 1.0, abs_tol);
    }

    const double pts[2] = {a, b};
    return integrate(f, pts, abs_tol);
}

IntegrationResult integrate(const std::function<double(double)>& f,
                            std::span<const double> breakpoints, double abs_tol) {
    if (breakpoints.size() < 2) return {0.0, 0.0};
    constexpr int kMaxPanels = 4000;
    std::priority_queue<Panel> queue;
    double total_err = 0.0;
    int panels = 0;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i - 1] < breakpoints[i])) continue;
        Panel panel = evaluate_panel(f, breakpoints[i - 1], breakpoints[i]);
        total_err += panel.err;
        queue.push(panel);
        ++panels;
    }
    if (panels == 0) return {0.0, 0.0};
    while (total_err > abs_tol && panels < kMaxPanels) {
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval width exhausted
            queue.push(worst);
            break;
        }
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total_err += left.err + right.err - worst.err;
        queue.push(left);
        queue.push(right);
        ++panels;
    }
    double value = 0.0;
    double err = 0.0;
    while (!queue.empty()) {
        value += queue.top().value;
        err += queue.top().err;
        queue.pop();
    }
    return {value, err};
}

}  // namespace piid
