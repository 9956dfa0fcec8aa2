#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kcq::measures {

// An attacker's conditional probability distribution over the N = 2^n
// candidate n-bit strings. Dense storage is capped at n <= 24; the
// structured forms carry closed-form measures and work for any n (the
// breach-table regime needs n ~ 10^6).
class Cpd {
  public:
    enum class Form { kDense, kSpikeUniform, kProductBernoulli, kSubsetModel };

    static constexpr int kMaxDenseBits = 24;
    static constexpr double kMassTolerance = 1e-12;

    // Dense vector of 2^n probabilities. Validates mass and nonnegativity;
    // renormalization is never silent.
    static Cpd dense(int n, std::vector<double> probs);
    static Cpd uniform_dense(int n);

    // One candidate at p1, the remaining mass spread evenly.
    static Cpd spike_uniform(int n, double p1);

    // count equal spikes of mass 1/count, the minimum-entropy shape for a
    // given maximum probability.
    static Cpd equal_spikes(int n, std::uint64_t count);

    // Independent per-bit success probability p0 in [1/2, 1]; candidate at
    // Hamming distance w from the truth has probability p0^(n-w)(1-p0)^w.
    static Cpd product_bernoulli(int n, double p0);

    // Subset layout: the first 2^(n-m) candidates carry mass p (spread by q,
    // uniform when q is omitted), every other candidate gets an equal share
    // of 1-p.
    static Cpd subset_model(int n, int m, double p);
    static Cpd subset_model(int n, int m, double p, std::vector<double> q);

    Form form() const { return form_; }
    int n() const { return n_; }
    double num_candidates() const;  // 2^n as a double (inf for huge n)

    // Dense access; throws unless the form is dense.
    const std::vector<double>& probabilities() const;

    // Materialize any form as dense (n <= 24 only).
    Cpd to_dense() const;

    // Structured parameters.
    double spike_p1() const { return p1_; }
    std::uint64_t spike_count() const { return spikes_; }
    double bernoulli_p0() const { return p0_; }
    int subset_m() const { return m_; }
    double subset_p() const { return p_; }
    bool has_explicit_q() const { return form_ == Form::kSubsetModel && !probs_.empty(); }

    // Serialization of dense CPDs: 4-byte little-endian unsigned n followed
    // by 2^n 8-byte little-endian doubles.
    void write_binary(std::ostream& os) const;
    static Cpd read_binary(std::istream& is);

  private:
    Cpd() = default;

    Form form_ = Form::kDense;
    int n_ = 0;
    std::vector<double> probs_;  // dense values, or q for the subset form
    double p1_ = 0.0;            // spike mass
    double p0_ = 0.0;            // per-bit success probability
    int m_ = 0;                  // subset length
    double p_ = 0.0;             // subset mass
    std::uint64_t spikes_ = 0;   // equal-spike count (spike form with count > 1)
};

// All six measures of a CPD. Entropies are in bits (log base 2 throughout).
struct MeasureReport {
    double p1 = 0.0;                    // max_i p_i
    double shannon_entropy_bits = 0.0;  // H_E
    double mutual_info_bits = 0.0;      // I_E = n - H_E
    double variational_distance = 0.0;  // delta_E = (1/2) sum |p_i - 1/N|
    double trial_complexity = 0.0;      // C_t = sum i * p_(i), descending order
    double epsilon_uniform = 0.0;       // max_i |p_i - 1/N|
};

// Computes every measure. Dense forms are evaluated directly (ties in the
// descending sort for C_t keep candidate-index order); structured forms use
// their closed forms and are valid for any n.
MeasureReport measure_all(const Cpd& cpd);

// Largest Shannon entropy compatible with a given maximum probability:
// F(p1) = h2(p1) + (1 - p1) log2(2^n - 1), attained by the spike-uniform
// shape. Domain: 2^-n <= p1 <= 1.
double max_entropy_given_p1(int n, double p1);

// Inverse of the frontier on its decreasing branch: the largest maximum
// probability compatible with Shannon entropy >= h (equivalently with
// mutual information <= n - h).
double max_p1_given_entropy(int n, double h_bits);

// Worst-case p1 compatible with mutual information rate I_E/n <= 2^-l:
// 2^-l - [n / log2(2^n - 1) - 1]. This is a guarantee the attacker can
// nearly reach (witnessed by a spike-uniform CPD), not an upper bound on
// every CPD.
double worst_case_p1_bound(int n, double l);

// The slack term n / log2(2^n - 1) - 1 of the bound above.
double worst_case_p1_slack(int n);

// Entropy floor given p1 <= 2^-l: H_E >= l bits.
double min_entropy_given_p1(double l);

// Expected-guesswork floor given p1 <= 2^-l: C_t >= (2^l + 1) / 2.
double min_trials_given_p1(double l);

struct SubsetBreach {
    double probability = 0.0;  // p ~ (n/m) p1
    bool regime_ok = true;     // false when 2^n >> 2^m fails (n - m < 10)
};

// Probability of guessing an m-bit subset under the constraint
// I_E/n <= p1: p = (n/m) p1. Requires p1 <= m/n.
SubsetBreach subset_breach(int n, int m, double p1);

// Subset guarantee from the variational distance: any m-bit subsequence is
// guessed with probability at most delta + 2^-m.
double delta_subset_bound(double delta, int m);

// Markov tail bound Pr[X >= threshold] <= mean / threshold (clamped to 1).
double markov_tail_bound(double mean, double threshold);

struct CouplingReport {
    double delta = 0.0;                // variational distance of P and Q
    double pr_neq_independent = 0.0;   // Pr[X != X'] under the product coupling
    double pr_neq_optimal = 0.0;       // Pr[X != X'] under the maximal coupling
};

// Builds the product coupling and a greedy mass-matching (maximal) coupling
// of two dense CPDs on the same n and reports Pr[X != X'] for both. The
// maximal coupling attains Pr[X != X'] = delta(P, Q); the product coupling
// of two identical uniforms gives 1 - 1/N.
CouplingReport coupling_demo(const Cpd& P, const Cpd& Q);

// Exact push-forward of a dense CPD through a deterministic n -> m bit map
// given as a table of 2^n values below 2^m. The output maximum probability
// can never drop below the input's (the p1 limit on privacy distillation).
Cpd privacy_distill(const Cpd& input, int m, const std::vector<std::uint32_t>& map_table);

// Max probability over the marginal of an arbitrary bit subset (mask over
// bit positions); brute-force helper for the subset bounds.
double best_subset_guess(const Cpd& dense, std::uint32_t subset_mask);

}  // namespace kcq::measures
