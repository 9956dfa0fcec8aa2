#include "kcq/cpd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "kcq/math_util.hpp"

namespace kcq::measures {

namespace {

void check_bits(int n, int max_bits) {
    if (n < 1 || n > max_bits) throw std::invalid_argument("bit length out of range");
}

void check_dense_bits(int n) {
    if (n < 1 || n > Cpd::kMaxDenseBits)
        throw std::invalid_argument("dense CPDs are limited to n <= 24");
}

void validate_mass(const std::vector<double>& probs) {
    double mass = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("CPD entries must be nonnegative");
        mass += p;
    }
    if (std::abs(mass - 1.0) > Cpd::kMassTolerance * static_cast<double>(probs.size()))
        throw std::invalid_argument("CPD mass differs from 1 beyond tolerance");
}

}  // namespace

Cpd Cpd::dense(int n, std::vector<double> probs) {
    check_dense_bits(n);
    if (probs.size() != (std::size_t{1} << n))
        throw std::invalid_argument("dense CPD needs exactly 2^n entries");
    validate_mass(probs);
    Cpd c;
    c.form_ = Form::kDense;
    c.n_ = n;
    c.probs_ = std::move(probs);
    return c;
}

Cpd Cpd::uniform_dense(int n) {
    check_dense_bits(n);
    std::size_t N = std::size_t{1} << n;
    return dense(n, std::vector<double>(N, 1.0 / static_cast<double>(N)));
}

Cpd Cpd::spike_uniform(int n, double p1) {
    check_bits(n, 1 << 24);
    double floor = std::exp2(-static_cast<double>(n));
    if (!(p1 >= floor - 1e-15 && p1 <= 1.0 + 1e-15))
        throw std::domain_error("spike mass must lie in [2^-n, 1]");
    Cpd c;
    c.form_ = Form::kSpikeUniform;
    c.n_ = n;
    c.p1_ = std::min(1.0, std::max(floor, p1));
    c.spikes_ = 1;
    return c;
}

Cpd Cpd::equal_spikes(int n, std::uint64_t count) {
    check_bits(n, 62);
    if (count == 0 || count > (std::uint64_t{1} << n))
        throw std::invalid_argument("spike count out of range");
    Cpd c;
    c.form_ = Form::kSpikeUniform;
    c.n_ = n;
    c.p1_ = 1.0 / static_cast<double>(count);
    c.spikes_ = count;
    return c;
}

Cpd Cpd::product_bernoulli(int n, double p0) {
    check_bits(n, 1 << 24);
    if (!(p0 >= 0.5 && p0 <= 1.0))
        throw std::domain_error("per-bit probability must lie in [1/2, 1]");
    Cpd c;
    c.form_ = Form::kProductBernoulli;
    c.n_ = n;
    c.p0_ = p0;
    return c;
}

Cpd Cpd::subset_model(int n, int m, double p) {
    check_bits(n, 1 << 24);
    if (m < 1 || m > n) throw std::invalid_argument("subset length must lie in [1, n]");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("subset mass must lie in [0, 1]");
    Cpd c;
    c.form_ = Form::kSubsetModel;
    c.n_ = n;
    c.m_ = m;
    c.p_ = p;
    return c;
}

Cpd Cpd::subset_model(int n, int m, double p, std::vector<double> q) {
    if (n > Cpd::kMaxDenseBits) throw std::invalid_argument("explicit q requires n <= 24");
    Cpd c = subset_model(n, m, p);
    if (q.size() != (std::size_t{1} << (n - m)))
        throw std::invalid_argument("q needs exactly 2^(n-m) entries");
    double mass = std::accumulate(q.begin(), q.end(), 0.0);
    for (double v : q)
        if (!(v >= 0.0)) throw std::invalid_argument("q entries must be nonnegative");
    if (std::abs(mass - 1.0) > kMassTolerance * static_cast<double>(q.size()))
        throw std::invalid_argument("q mass differs from 1 beyond tolerance");
    c.probs_ = std::move(q);
    return c;
}

double Cpd::num_candidates() const { return std::exp2(static_cast<double>(n_)); }

const std::vector<double>& Cpd::probabilities() const {
    if (form_ != Form::kDense) throw std::logic_error("not a dense CPD");
    return probs_;
}

Cpd Cpd::to_dense() const {
    check_dense_bits(n_);
    std::size_t N = std::size_t{1} << n_;
    switch (form_) {
        case Form::kDense:
            return *this;
        case Form::kSpikeUniform: {
            std::vector<double> v(N, 0.0);
            double rest = 0.0;
            if (spikes_ < N)
                rest = (1.0 - p1_ * static_cast<double>(spikes_)) / static_cast<double>(N - spikes_);
            for (std::size_t i = 0; i < N; ++i) v[i] = i < spikes_ ? p1_ : std::max(0.0, rest);
            return dense(n_, std::move(v));
        }
        case Form::kProductBernoulli: {
            std::vector<double> v(N);
            double q = 1.0 - p0_;
            for (std::size_t x = 0; x < N; ++x) {
                int w = std::popcount(static_cast<std::uint64_t>(x));
                v[x] = std::pow(p0_, n_ - w) * std::pow(q, w);
            }
            return dense(n_, std::move(v));
        }
        case Form::kSubsetModel: {
            std::size_t L = std::size_t{1} << (n_ - m_);
            std::vector<double> v(N);
            double tail = (1.0 - p_) / static_cast<double>(N - L);
            for (std::size_t i = 0; i < N; ++i) {
                if (i < L)
                    v[i] = p_ * (probs_.empty() ? 1.0 / static_cast<double>(L) : probs_[i]);
                else
                    v[i] = tail;
            }
            return dense(n_, std::move(v));
        }
    }
    throw std::logic_error("unreachable");
}

void Cpd::write_binary(std::ostream& os) const {
    if (form_ != Form::kDense) throw std::logic_error("only dense CPDs serialize");
    std::uint32_t n32 = static_cast<std::uint32_t>(n_);
    unsigned char hdr[4];
    for (int i = 0; i < 4; ++i) hdr[i] = static_cast<unsigned char>((n32 >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(hdr), 4);
    for (double p : probs_) {
        std::uint64_t u;
        std::memcpy(&u, &p, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
        os.write(reinterpret_cast<const char*>(b), 8);
    }
}

Cpd Cpd::read_binary(std::istream& is) {
    unsigned char hdr[4];
    if (!is.read(reinterpret_cast<char*>(hdr), 4)) throw std::runtime_error("truncated CPD header");
    std::uint32_t n32 = 0;
    for (int i = 0; i < 4; ++i) n32 |= static_cast<std::uint32_t>(hdr[i]) << (8 * i);
    if (n32 < 1 || n32 > kMaxDenseBits) throw std::runtime_error("CPD header bit length out of range");
    std::size_t N = std::size_t{1} << n32;
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated CPD payload");
        std::uint64_t u = 0;
        for (int j = 0; j < 8; ++j) u |= static_cast<std::uint64_t>(b[j]) << (8 * j);
        double p;
        std::memcpy(&p, &u, 8);
        v[i] = p;
    }
    return dense(static_cast<int>(n32), std::move(v));
}

namespace {

MeasureReport measure_dense(int n, const std::vector<double>& probs) {
    MeasureReport r;
    std::size_t N = probs.size();
    double inv = 1.0 / static_cast<double>(N);
    double H = 0.0, dsum = 0.0, eps = 0.0, p1 = 0.0;
    for (double p : probs) {
        H -= kcq::xlog2x(p);
        dsum += std::abs(p - inv);
        eps = std::max(eps, std::abs(p - inv));
        p1 = std::max(p1, p);
    }
    std::vector<double> sorted(probs);
    std::stable_sort(sorted.begin(), sorted.end(), [](double a, double b) { return a > b; });
    double ct = 0.0;
    for (std::size_t i = 0; i < N; ++i) ct += static_cast<double>(i + 1) * sorted[i];
    r.p1 = p1;
    r.shannon_entropy_bits = H;
    r.mutual_info_bits = static_cast<double>(n) - H;
    r.variational_distance = 0.5 * dsum;
    r.trial_complexity = ct;
    r.epsilon_uniform = eps;
    return r;
}

MeasureReport measure_spike(int n, double p1, std::uint64_t spikes) {
    // Closed forms written so that nothing multiplies an overflowed count by
    // an underflowed mass; valid up to n ~ 10^6.
    MeasureReport r;
    double nd = static_cast<double>(n);
    double N = std::exp2(nd);  // inf beyond n = 1024; only used where safe
    double inv = std::exp2(-nd);
    double k = static_cast<double>(spikes);
    double rest_total = std::max(0.0, 1.0 - p1 * k);
    // log2 of the number of non-spike candidates: n + log2(1 - k 2^-n).
    double log2_others = nd + std::log1p(-k * inv) / std::log(2.0);
    double log2_rest = rest_total > 0 ? std::log2(rest_total) - log2_others : 0.0;
    double rest = rest_total > 0 ? std::exp2(log2_rest) : 0.0;

    r.p1 = p1;
    r.shannon_entropy_bits = -k * kcq::xlog2x(p1) - rest_total * log2_rest;
    r.mutual_info_bits = nd - r.shannon_entropy_bits;
    // Sum over the flat remainder collapses to |rest_total - (1 - k/N)|.
    r.variational_distance =
        0.5 * (k * std::abs(p1 - inv) + std::abs(rest_total - (1.0 - k * inv)));
    // Ranks 1..k at p1; the remainder averages rank (N + k + 1)/2.
    r.trial_complexity = p1 * 0.5 * k * (k + 1.0) + rest_total * 0.5 * (N + k + 1.0);
    r.epsilon_uniform = std::max(std::abs(p1 - inv), std::abs(rest - inv));
    return r;
}

MeasureReport measure_bernoulli(int n, double p0) {
    MeasureReport r;
    double q = 1.0 - p0;
    double nd = static_cast<double>(n);
    r.p1 = std::exp(nd * std::log(p0));
    r.shannon_entropy_bits = nd * kcq::binary_entropy(p0);
    r.mutual_info_bits = nd - r.shannon_entropy_bits;

    // delta_E reduces to the total variation between Binomial(n, 1-p0) and
    // Binomial(n, 1/2); C_t walks the weight classes in descending
    // probability. Log-space keeps both stable for large n.
    double lgn = std::lgamma(nd + 1.0);
    double ln_p0 = std::log(p0);
    double ln_q = q > 0 ? std::log(q) : 0.0;
    double ln_half = -nd * std::log(2.0);
    double dsum = 0.0, ct = 0.0, rank_before = 0.0;
    for (int w = 0; w <= n; ++w) {
        double lc = lgn - std::lgamma(w + 1.0) - std::lgamma(nd - w + 1.0);
        double v = (q == 0.0) ? (w == 0 ? 1.0 : 0.0) : std::exp((nd - w) * ln_p0 + w * ln_q);
        double count = std::exp(lc);
        dsum += std::abs(count * v - std::exp(lc + ln_half));
        ct += v * (count * rank_before + 0.5 * count * (count + 1.0));
        rank_before += count;
    }
    r.variational_distance = 0.5 * dsum;
    r.trial_complexity = ct;
    double inv = std::exp2(-nd);
    double q_pow = (q == 0.0) ? 0.0 : std::exp(nd * std::log(q));
    r.epsilon_uniform = std::max(r.p1 - inv, inv - q_pow);
    return r;
}

// Closed forms for the subset layout with uniform q, in log space where the
// counts overflow; valid for any n.
MeasureReport measure_subset_uniform_q(int n, int m, double p) {
    MeasureReport r;
    double nd = static_cast<double>(n);
    double md = static_cast<double>(m);
    double ln2 = std::log(2.0);
    double m2 = std::exp2(-md);
    // log2 of the per-candidate masses on both plateaus.
    double log2_head = p > 0 ? std::log2(p) - (nd - md) : 0.0;
    double log2_tail_count = nd + std::log1p(-m2) / ln2;  // log2(2^n - 2^{n-m})
    double log2_tail = (1.0 - p) > 0 ? std::log2(1.0 - p) - log2_tail_count : 0.0;
    double head = p > 0 ? std::exp2(log2_head) : 0.0;
    double tail = (1.0 - p) > 0 ? std::exp2(log2_tail) : 0.0;
    double inv = std::exp2(-nd);

    r.p1 = std::max(head, tail);
    r.shannon_entropy_bits = -(p > 0 ? p * log2_head : 0.0) -
                             ((1.0 - p) > 0 ? (1.0 - p) * log2_tail : 0.0);
    r.mutual_info_bits = nd - r.shannon_entropy_bits;
    // Both plateaus collapse: L|head - 1/N| = |p - 2^-m| and likewise for
    // the remainder.
    r.variational_distance = 0.5 * (std::abs(p - m2) + std::abs((1.0 - p) - (1.0 - m2)));
    r.epsilon_uniform = std::max(std::abs(head - inv), std::abs(tail - inv));
    // Flat-block ranks via block masses and average ranks; overflows to inf
    // only when the true value exceeds double range.
    double L = std::exp2(nd - md);
    double Nd = std::exp2(nd);
    double heavy_mass = head >= tail ? p : 1.0 - p;
    double light_mass = head >= tail ? 1.0 - p : p;
    double heavy_count = head >= tail ? L : Nd - L;
    r.trial_complexity = heavy_mass * 0.5 * (heavy_count + 1.0) +
                         light_mass * 0.5 * (heavy_count + Nd + 1.0);
    return r;
}

}  // namespace

MeasureReport measure_all(const Cpd& cpd) {
    switch (cpd.form()) {
        case Cpd::Form::kDense:
            return measure_dense(cpd.n(), cpd.probabilities());
        case Cpd::Form::kSpikeUniform:
            return measure_spike(cpd.n(), cpd.spike_p1(), cpd.spike_count());
        case Cpd::Form::kProductBernoulli:
            return measure_bernoulli(cpd.n(), cpd.bernoulli_p0());
        case Cpd::Form::kSubsetModel:
            if (cpd.has_explicit_q()) return measure_dense(cpd.n(), cpd.to_dense().probabilities());
            return measure_subset_uniform_q(cpd.n(), cpd.subset_m(), cpd.subset_p());
    }
    throw std::logic_error("unreachable");
}

double max_entropy_given_p1(int n, double p1) {
    double lo = std::exp2(-static_cast<double>(n));
    if (!(p1 >= lo - 1e-15 && p1 <= 1.0 + 1e-15)) throw std::domain_error("p1 must lie in [2^-n, 1]");
    p1 = std::min(1.0, std::max(lo, p1));
    return kcq::binary_entropy(p1) + (1.0 - p1) * kcq::log2_pow2_minus_one(n);
}

double max_p1_given_entropy(int n, double h_bits) {
    if (h_bits < 0.0 || h_bits > static_cast<double>(n) + 1e-12)
        throw std::domain_error("entropy outside [0, n]");
    double lo = std::exp2(-static_cast<double>(n)), hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (max_entropy_given_p1(n, mid) >= h_bits)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double worst_case_p1_slack(int n) {
    if (n < 2) throw std::domain_error("need n >= 2");
    return static_cast<double>(n) / kcq::log2_pow2_minus_one(n) - 1.0;
}

double worst_case_p1_bound(int n, double l) {
    if (l > static_cast<double>(n) + 1e-12) throw std::domain_error("need l <= n");
    return std::exp2(-l) - worst_case_p1_slack(n);
}

double min_entropy_given_p1(double l) {
    if (l < 0.0) throw std::domain_error("need l >= 0");
    return l;
}

double min_trials_given_p1(double l) {
    if (l < 0.0) throw std::domain_error("need l >= 0");
    return 0.5 * (std::exp2(l) + 1.0);
}

SubsetBreach subset_breach(int n, int m, double p1) {
    if (m < 1 || m > n) throw std::invalid_argument("subset length must lie in [1, n]");
    double ratio = static_cast<double>(m) / static_cast<double>(n);
    if (p1 > ratio + 1e-15) throw std::domain_error("requires p1 <= m/n");
    SubsetBreach b;
    b.probability = (static_cast<double>(n) / static_cast<double>(m)) * p1;
    b.regime_ok = (n - m) >= 10;
    return b;
}

double delta_subset_bound(double delta, int m) {
    if (delta < 0.0 || delta > 1.0) throw std::domain_error("delta must lie in [0, 1]");
    if (m < 1) throw std::invalid_argument("need m >= 1");
    return std::min(1.0, delta + std::exp2(-static_cast<double>(m)));
}

double markov_tail_bound(double mean, double threshold) {
    if (mean < 0.0) throw std::domain_error("mean must be nonnegative");
    if (!(threshold > 0.0)) throw std::domain_error("threshold must be positive");
    return std::min(1.0, mean / threshold);
}

CouplingReport coupling_demo(const Cpd& P, const Cpd& Q) {
    if (P.form() != Cpd::Form::kDense || Q.form() != Cpd::Form::kDense)
        throw std::invalid_argument("coupling demo needs dense CPDs");
    if (P.n() != Q.n()) throw std::invalid_argument("bit lengths must match");
    if (P.n() > 16) throw std::invalid_argument("coupling demo limited to n <= 16");
    const auto& p = P.probabilities();
    const auto& q = Q.probabilities();
    std::size_t N = p.size();

    CouplingReport r;
    double dsum = 0.0, agree = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        dsum += std::abs(p[i] - q[i]);
        agree += p[i] * q[i];
    }
    r.delta = 0.5 * dsum;
    r.pr_neq_independent = 1.0 - agree;

    // Maximal coupling built explicitly: min(p_i, q_i) sits on the diagonal,
    // the surpluses are matched greedily; everything matched off-diagonal is
    // Pr[X != X'].
    std::vector<double> ps(N), qs(N);
    for (std::size_t i = 0; i < N; ++i) {
        double d = std::min(p[i], q[i]);
        ps[i] = p[i] - d;
        qs[i] = q[i] - d;
    }
    double off = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double need = ps[i];
        while (need > 1e-18) {
            while (j < N && qs[j] <= 1e-18) ++j;
            if (j >= N) break;
            double m = std::min(need, qs[j]);
            off += m;
            need -= m;
            qs[j] -= m;
        }
    }
    r.pr_neq_optimal = off;
    return r;
}

Cpd privacy_distill(const Cpd& input, int m, const std::vector<std::uint32_t>& map_table) {
    if (input.form() != Cpd::Form::kDense)
        throw std::invalid_argument("distillation input must be dense");
    int n = input.n();
    if (n > 16) throw std::invalid_argument("distillation limited to n <= 16");
    if (m >= n || m < 1) throw std::invalid_argument("output length must satisfy 1 <= m < n");
    const auto& p = input.probabilities();
    if (map_table.size() != p.size()) throw std::invalid_argument("map table needs 2^n entries");
    std::size_t M = std::size_t{1} << m;
    std::vector<double> out(M, 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (map_table[x] >= M) throw std::invalid_argument("map value out of range");
        out[map_table[x]] += p[x];
    }
    Cpd result = Cpd::dense(m, std::move(out));
    double in_p1 = *std::max_element(p.begin(), p.end());
    double out_p1 =
        *std::max_element(result.probabilities().begin(), result.probabilities().end());
    if (out_p1 + 1e-15 < in_p1) throw std::logic_error("push-forward lowered the maximum probability");
    return result;
}

double best_subset_guess(const Cpd& dense, std::uint32_t subset_mask) {
    if (dense.form() != Cpd::Form::kDense) throw std::invalid_argument("needs a dense CPD");
    const auto& p = dense.probabilities();
    std::vector<double> marginal(p.size(), 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) marginal[x & subset_mask] += p[x];
    return *std::max_element(marginal.begin(), marginal.end());
}

}  // namespace kcq::measures
