#include "levygibbs/stats.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levygibbs::stats {

double neumaier_sum(std::span<const double> x)
{
    double sum = 0, c = 0;
    for (double v : x) {
        const double t = sum + v;
        c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + c;
}

Estimate mean(std::span<const double> x)
{
    if (x.empty())
        return {};
    const double n = static_cast<double>(x.size());
    const double m = neumaier_sum(x) / n;
    if (x.size() < 2)
        return {m, 0};
    return {m, std::sqrt(variance(x) / n)};
}

double variance(std::span<const double> x)
{
    if (x.size() < 2)
        return 0;
    const double m = neumaier_sum(x) / static_cast<double>(x.size());
    double s = 0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double q)
{
    if (x.empty())
        return 0;
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= x.size())
        return x.back();
    const double f = pos - static_cast<double>(i);
    return x[i] * (1 - f) + x[i + 1] * f;
}

Estimate proportion(std::uint64_t k, std::uint64_t n)
{
    if (n == 0)
        return {0, 1};
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double pw = (static_cast<double>(k) + 1.0) / (static_cast<double>(n) + 2.0);
    return {p, std::sqrt(pw * (1 - pw) / static_cast<double>(n))};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || (!w.empty() && w.size() != n))
        throw Error("linear_fit: need at least two matching points");
    auto wt = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += wt(i);
        sx += wt(i) * x[i];
        sy += wt(i) * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += wt(i) * (x[i] - mx) * (x[i] - mx);
        sxy += wt(i) * (x[i] - mx) * (y[i] - my);
        syy += wt(i) * (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += wt(i) * r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    if (n > 2 && sxx > 0)
        f.slope_se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    return f;
}

double effective_sample_size(std::span<const double> w)
{
    double s = 0, s2 = 0;
    for (double v : w) {
        s += v;
        s2 += v * v;
    }
    return s2 > 0 ? s * s / s2 : 0;
}

double bootstrap_se(std::span<const double> x, int resamples, std::uint64_t seed, std::uint64_t stream)
{
    if (x.size() < 2 || resamples < 2)
        return 0;
    StreamEngine eng(seed, stream);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    const auto n = x.size();
    for (auto& m : means) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[static_cast<std::size_t>(eng.uniform() * static_cast<double>(n)) % n];
        m = s / static_cast<double>(n);
    }
    return std::sqrt(variance(means));
}

namespace {

struct Item
{
    double x;
    double w; // signed: +w for group 1, -w for group 2 after normalization
};

double ks_from_items(std::vector<Item>& items)
{
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.x < b.x; });
    double d = 0, acc = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        acc += items[i].w;
        // only evaluate between distinct values
        if (i + 1 == items.size() || items[i + 1].x != items[i].x)
            d = std::max(d, std::abs(acc));
    }
    return std::min(1.0, d);
}

} // namespace

double weighted_ks(std::span<const double> x1, std::span<const double> w1, std::span<const double> x2,
                   std::span<const double> w2)
{
    auto total = [](std::span<const double> w, std::size_t n) {
        return w.empty() ? static_cast<double>(n) : std::accumulate(w.begin(), w.end(), 0.0);
    };
    const double t1 = total(w1, x1.size()), t2 = total(w2, x2.size());
    if (!(t1 > 0) || !(t2 > 0))
        throw Error("weighted_ks: empty or zero-weight sample");
    std::vector<Item> items;
    items.reserve(x1.size() + x2.size());
    for (std::size_t i = 0; i < x1.size(); ++i)
        items.push_back({x1[i], (w1.empty() ? 1.0 : w1[i]) / t1});
    for (std::size_t i = 0; i < x2.size(); ++i)
        items.push_back({x2[i], -(w2.empty() ? 1.0 : w2[i]) / t2});
    return ks_from_items(items);
}

double permutation_ks_critical(std::span<const double> x1, std::span<const double> w1, std::span<const double> x2,
                               std::span<const double> w2, int permutations, double level, std::uint64_t seed,
                               std::uint64_t stream)
{
    const std::size_t n1 = x1.size(), n = x1.size() + x2.size();
    std::vector<double> xs, ws;
    xs.reserve(n);
    ws.reserve(n);
    for (std::size_t i = 0; i < x1.size(); ++i) {
        xs.push_back(x1[i]);
        ws.push_back(w1.empty() ? 1.0 : w1[i]);
    }
    for (std::size_t i = 0; i < x2.size(); ++i) {
        xs.push_back(x2[i]);
        ws.push_back(w2.empty() ? 1.0 : w2[i]);
    }
    StreamEngine eng(seed, stream);
    std::vector<std::size_t> idx(n);
    std::vector<double> stat(static_cast<std::size_t>(permutations));
    std::vector<Item> items(n);
    for (auto& s : stat) {
        std::iota(idx.begin(), idx.end(), 0);
        // Fisher-Yates with our own uniform draws: std::shuffle is not portable across libraries.
        for (std::size_t i = n - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(eng.uniform() * static_cast<double>(i + 1));
            std::swap(idx[i], idx[std::min(j, i)]);
        }
        double t1 = 0, t2 = 0;
        for (std::size_t i = 0; i < n; ++i)
            (i < n1 ? t1 : t2) += ws[idx[i]];
        for (std::size_t i = 0; i < n; ++i)
            items[i] = {xs[idx[i]], i < n1 ? ws[idx[i]] / t1 : -ws[idx[i]] / t2};
        s = ks_from_items(items);
    }
    return quantile(stat, level);
}

double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return d;
}

double kolmogorov_pvalue(double d, double n_eff)
{
    const double sn = std::sqrt(n_eff);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2)
        return 1.0;
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double kolmogorov_critical(double n_eff, double level)
{
    // bisection on the monotone survival function
    double lo = 0, hi = 1;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_pvalue(mid, n_eff) > 1.0 - level ? lo : hi) = mid;
    }
    return hi;
}

double chi_square_survival(double k, double x)
{
    if (x <= 0)
        return 1.0;
    return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

} // namespace levygibbs::stats
