// Copyright 2026 The mqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mqkd/adversary_lab.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mqkd/key_distillation.hpp"

namespace mqkd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kEigenvalueFloor = 1e-12;

Ket basis_ket(std::size_t dim, std::size_t index) {
    Ket k(dim, Complex{0});
    k[index] = 1;
    return k;
}

double ket_norm_squared(const Ket &k) {
    double s = 0;
    for (const auto &z : k) {
        s += std::norm(z);
    }
    return s;
}

Complex ket_inner(const Ket &a, const Ket &b) {
    Complex acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

// |+> or |-> (photon, most significant) tensored with an ancilla ket.
std::vector<Complex> photon_x_tensor(bool plus, const Ket &ancilla) {
    const std::size_t d = ancilla.size();
    std::vector<Complex> out(2 * d);
    for (std::size_t a = 0; a < d; ++a) {
        out[a] = kInvSqrt2 * ancilla[a];
        out[d + a] = (plus ? kInvSqrt2 : -kInvSqrt2) * ancilla[a];
    }
    return out;
}

void add_scaled(std::vector<Complex> &acc, Complex scale, const std::vector<Complex> &v) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i] += scale * v[i];
    }
}

void check_pair(Complex first, Complex second, const char *what) {
    for (Complex z : {first, second}) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw InvalidAttackError(std::string(what) + ": coefficients must be finite");
        }
    }
    const double total = std::norm(first) + std::norm(second);
    if (std::abs(total - 1.0) > kStateTolerance) {
        std::ostringstream msg;
        msg << what << ": squared magnitudes sum to " << total << ", expected 1";
        throw InvalidAttackError(msg.str());
    }
}

void check_mark(const Ket &mark, std::size_t dim, const char *what) {
    if (mark.size() != dim) {
        throw InvalidAttackError(std::string(what) + ": mark has dimension " + std::to_string(mark.size()) +
                                 ", expected " + std::to_string(dim));
    }
    if (std::abs(ket_norm_squared(mark) - 1.0) > kStateTolerance) {
        throw InvalidAttackError(std::string(what) + ": mark is not a unit vector");
    }
}

void validate_leg(const LegCoupling &leg, const char *name) {
    if (leg.ancilla_qubits == 0 || leg.ancilla_qubits > 4) {
        throw InvalidAttackError(std::string(name) + ": ancilla register must have 1 to 4 qubits");
    }
    const std::size_t dim = std::size_t{1} << leg.ancilla_qubits;
    const std::string n(name);
    check_pair(leg.plus_plus, leg.plus_minus, (n + " |+> branch").c_str());
    check_mark(leg.mark_plus_plus, dim, (n + " mark ++").c_str());
    check_mark(leg.mark_plus_minus, dim, (n + " mark +-").c_str());
    if (leg.minus_specified) {
        check_pair(leg.minus_plus, leg.minus_minus, (n + " |-> branch").c_str());
        check_mark(leg.mark_minus_plus, dim, (n + " mark -+").c_str());
        check_mark(leg.mark_minus_minus, dim, (n + " mark --").c_str());
    }
}

struct CompiledLeg {
    std::size_t ancilla_qubits;
    Unitary unitary;
};

using CompiledPlan = std::array<std::optional<CompiledLeg>, 3>;

CompiledPlan compile(const AttackPlan &plan) {
    CompiledPlan out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i]) {
            out[i] = CompiledLeg{plan[i]->ancilla_qubits, build_leg_unitary(*plan[i])};
        }
    }
    return out;
}

void couple(const CompiledLeg &leg, StateVector &state) {
    const std::size_t n = state.num_qubits();
    state = tensor(state, StateVector::basis_state(leg.ancilla_qubits, 0));
    std::vector<std::size_t> targets{0};
    for (std::size_t q = 0; q < leg.ancilla_qubits; ++q) {
        targets.push_back(n + q);
    }
    state = apply_unitary(state, leg.unitary, targets);
}

class CouplingHook final : public AdversaryHook {
   public:
    CouplingHook(CompiledPlan plan, std::string name) : plan_(std::move(plan)), name_(std::move(name)) {}

    void intercept(Segment segment, StateVector &in_flight, Rng &) const override {
        const auto &leg = plan_[static_cast<std::size_t>(segment)];
        if (leg) {
            couple(*leg, in_flight);
        }
    }
    std::string describe() const override { return name_; }

   private:
    CompiledPlan plan_;
    std::string name_;
};

class InterceptResendHook final : public AdversaryHook {
   public:
    explicit InterceptResendHook(InterceptResend config) : config_(config) {}

    void intercept(Segment segment, StateVector &in_flight, Rng &rng) const override {
        if (segment == config_.segment) {
            in_flight = intercept_resend(in_flight, config_.basis, rng);
        }
    }
    std::string describe() const override { return mqkd::describe(AttackStrategy{config_}); }

   private:
    InterceptResend config_;
};

RoundDistribution evaluate_compiled(const CompiledPlan &plan, UnitaryOp alice_op, UnitaryOp bob_op) {
    StateVector state = prepare_plus();
    auto stage = [&](Segment s) {
        const auto &leg = plan[static_cast<std::size_t>(s)];
        if (leg) {
            couple(*leg, state);
        }
    };
    stage(Segment::TPtoAlice);
    state = apply_op(state, alice_op, 0);
    stage(Segment::AliceToBob);
    state = apply_op(state, bob_op, 0);
    stage(Segment::BobToTP);

    RoundDistribution out;
    out.ancilla_qubits = state.num_qubits() - 1;
    const std::size_t d = state.dim() / 2;
    out.ancilla_given_plus.resize(d);
    out.ancilla_given_minus.resize(d);
    for (std::size_t a = 0; a < d; ++a) {
        const Complex low = state[a];
        const Complex high = state[d + a];
        out.ancilla_given_plus[a] = (low + high) * kInvSqrt2;
        out.ancilla_given_minus[a] = (low - high) * kInvSqrt2;
        out.p_plus += std::norm(out.ancilla_given_plus[a]);
        out.p_minus += std::norm(out.ancilla_given_minus[a]);
    }
    return out;
}

// Entropy in bits of rho = sum_i |v_i><v_i| / tr, from the Gram matrix of the
// v_i (same nonzero spectrum as rho). Returns 0 for an empty ensemble.
double ensemble_entropy(const std::vector<const std::vector<Complex> *> &vectors, double trace) {
    if (vectors.empty() || trace <= 0) {
        return 0;
    }
    const auto m = static_cast<Eigen::Index>(vectors.size());
    Eigen::MatrixXcd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Complex acc = 0;
            const auto &a = *vectors[static_cast<std::size_t>(i)];
            const auto &b = *vectors[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < a.size(); ++k) {
                acc += std::conj(a[k]) * b[k];
            }
            gram(i, j) = acc / trace;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
    double s = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        // Rounding noise near 0 or 1 would otherwise show up as ~1e-16 bits.
        const double lambda = solver.eigenvalues()(i);
        if (lambda > kEigenvalueFloor && lambda < 1.0 - kEigenvalueFloor) {
            s -= lambda * std::log2(lambda);
        }
    }
    return s;
}

double leakage_compiled(const CompiledPlan &plan) {
    constexpr UnitaryOp kKeyOps[] = {UnitaryOp::Identity, UnitaryOp::PauliZ};
    // Each key pair has prior 1/4, i.e. amplitude weight 1/2.
    std::vector<std::vector<Complex>> weighted[2][2];  // [outcome][bit]
    for (UnitaryOp a : kKeyOps) {
        for (UnitaryOp b : kKeyOps) {
            const auto dist = evaluate_compiled(plan, a, b);
            const std::uint8_t bit = derive_alice_bit(a);
            for (int o = 0; o < 2; ++o) {
                auto v = o == 0 ? dist.ancilla_given_plus : dist.ancilla_given_minus;
                for (auto &z : v) {
                    z *= 0.5;
                }
                weighted[o][bit].push_back(std::move(v));
            }
        }
    }

    double total = 0;
    for (int o = 0; o < 2; ++o) {
        double p_bit[2] = {0, 0};
        std::vector<const std::vector<Complex> *> all;
        std::vector<const std::vector<Complex> *> per_bit[2];
        for (int k = 0; k < 2; ++k) {
            for (const auto &v : weighted[o][k]) {
                double w = 0;
                for (const auto &z : v) {
                    w += std::norm(z);
                }
                p_bit[k] += w;
                all.push_back(&v);
                per_bit[k].push_back(&v);
            }
        }
        const double p_outcome = p_bit[0] + p_bit[1];
        if (p_outcome < kZeroProbability) {
            continue;
        }
        double chi = ensemble_entropy(all, p_outcome);
        for (int k = 0; k < 2; ++k) {
            if (p_bit[k] >= kZeroProbability) {
                chi -= (p_bit[k] / p_outcome) * ensemble_entropy(per_bit[k], p_bit[k]);
            }
        }
        total += p_outcome * chi;
    }
    return std::clamp(total, 0.0, 1.0);
}

AttackOutcomeStats exact_compiled(const CompiledPlan &plan) {
    AttackOutcomeStats stats;
    stats.detection_prob_case1 = evaluate_compiled(plan, UnitaryOp::Hadamard, UnitaryOp::Hadamard).p_minus;
    constexpr UnitaryOp kKeyOps[] = {UnitaryOp::Identity, UnitaryOp::PauliZ};
    double wrong = 0;
    for (UnitaryOp a : kKeyOps) {
        for (UnitaryOp b : kKeyOps) {
            const auto dist = evaluate_compiled(plan, a, b);
            wrong += expected_outcome(a, b) == Outcome::Plus ? dist.p_minus : dist.p_plus;
        }
    }
    stats.disclosed_mismatch_prob = wrong / 4.0;
    stats.leakage_bits = leakage_compiled(plan);
    return stats;
}

double gaussian(Rng &rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u = 1.0 - rng.uniform01();
    const double v = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

Complex random_phase(Rng &rng) { return std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01()); }

// Random unit vector orthogonal to every ket in `against`.
Ket random_orthogonal_ket(std::size_t dim, const std::vector<Ket> &against, Rng &rng) {
    while (true) {
        Ket k = random_ket(dim, rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &u : against) {
                const Complex c = ket_inner(u, k);
                for (std::size_t i = 0; i < dim; ++i) {
                    k[i] -= c * u[i];
                }
            }
        }
        const double n = std::sqrt(ket_norm_squared(k));
        if (n > 1e-6) {
            for (auto &z : k) {
                z /= n;
            }
            return k;
        }
    }
}

std::vector<Ket> random_orthonormal_family(std::size_t dim, std::size_t count, Rng &rng) {
    std::vector<Ket> family;
    for (std::size_t i = 0; i < count; ++i) {
        family.push_back(random_orthogonal_ket(dim, family, rng));
    }
    return family;
}

// Random (keep, flip) amplitudes with |keep|^2 + |flip|^2 = 1.
std::pair<Complex, Complex> random_pair(Rng &rng) {
    const double flip_mag = std::sqrt(rng.uniform01());
    return {std::polar(std::sqrt(1.0 - flip_mag * flip_mag), 2.0 * std::numbers::pi * rng.uniform01()),
            std::polar(flip_mag, 2.0 * std::numbers::pi * rng.uniform01())};
}

}  // namespace

AttackParams AttackParams::pass_through() {
    AttackParams p;
    p.source.ancilla_qubits = 1;
    p.source.minus_specified = false;
    p.source.plus_plus = 1;
    p.source.plus_minus = 0;
    p.source.minus_plus = 0;
    p.source.minus_minus = 1;
    p.source.mark_plus_plus = basis_ket(2, 0);
    p.source.mark_plus_minus = basis_ket(2, 1);
    p.source.mark_minus_plus = basis_ket(2, 1);
    p.source.mark_minus_minus = basis_ket(2, 0);

    for (LegCoupling *leg : {&p.alice_leg, &p.bob_leg}) {
        leg->ancilla_qubits = 2;
        leg->minus_specified = true;
        leg->plus_plus = 1;
        leg->plus_minus = 0;
        leg->minus_plus = 0;
        leg->minus_minus = 1;
        leg->mark_plus_plus = basis_ket(4, 0);
        leg->mark_plus_minus = basis_ket(4, 1);
        leg->mark_minus_plus = basis_ket(4, 1);
        leg->mark_minus_minus = basis_ket(4, 0);
    }
    return p;
}

AttackParams AttackParams::pass_through_distinct_marks() {
    AttackParams p = pass_through();
    for (LegCoupling *leg : {&p.alice_leg, &p.bob_leg}) {
        leg->mark_plus_plus = basis_ket(4, 0);
        leg->mark_plus_minus = basis_ket(4, 1);
        leg->mark_minus_plus = basis_ket(4, 2);
        leg->mark_minus_minus = basis_ket(4, 3);
    }
    return p;
}

void AttackParams::validate() const {
    validate_leg(source, "source (U1)");
    validate_leg(alice_leg, "Alice->Bob (U2)");
    validate_leg(bob_leg, "Bob->TP (U3)");
}

Unitary build_leg_unitary(const LegCoupling &leg) {
    validate_leg(leg, "coupling");
    const std::size_t anc_dim = std::size_t{1} << leg.ancilla_qubits;
    const std::size_t dim = 2 * anc_dim;

    // Inputs: |+>|j>, |->|j> for j = 0, 1, ...; the first one or two are
    // constrained by the coupling.
    std::vector<std::vector<Complex>> inputs;
    for (std::size_t j = 0; j < anc_dim; ++j) {
        inputs.push_back(photon_x_tensor(true, basis_ket(anc_dim, j)));
        inputs.push_back(photon_x_tensor(false, basis_ket(anc_dim, j)));
    }

    std::vector<std::vector<Complex>> outputs;
    {
        std::vector<Complex> w(dim);
        add_scaled(w, leg.plus_plus, photon_x_tensor(true, leg.mark_plus_plus));
        add_scaled(w, leg.plus_minus, photon_x_tensor(false, leg.mark_plus_minus));
        outputs.push_back(std::move(w));
    }
    if (leg.minus_specified) {
        std::vector<Complex> w(dim);
        add_scaled(w, leg.minus_plus, photon_x_tensor(true, leg.mark_minus_plus));
        add_scaled(w, leg.minus_minus, photon_x_tensor(false, leg.mark_minus_minus));
        outputs.push_back(std::move(w));
    }

    // The specified images must form an isometry.
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        for (std::size_t j = 0; j < outputs.size(); ++j) {
            const Complex g = ket_inner(outputs[i], outputs[j]);
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(g - want) > kStateTolerance) {
                std::ostringstream msg;
                msg << "coupling admits no unitary completion: Gram entry (" << i << "," << j << ") = " << g.real()
                    << (g.imag() < 0 ? "" : "+") << g.imag() << "i, expected " << want;
                throw InvalidAttackError(msg.str());
            }
        }
    }

    for (std::size_t c = 0; c < dim && outputs.size() < dim; ++c) {
        std::vector<Complex> v = basis_ket(dim, c);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &u : outputs) {
                const Complex proj = ket_inner(u, v);
                for (std::size_t i = 0; i < dim; ++i) {
                    v[i] -= proj * u[i];
                }
            }
        }
        const double n = std::sqrt(ket_norm_squared(v));
        if (n > 1e-6) {
            for (auto &z : v) {
                z /= n;
            }
            outputs.push_back(std::move(v));
        }
    }

    // U = sum_k |out_k><in_k|
    Matrix u(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                u(r, c) += outputs[k][r] * std::conj(inputs[k][c]);
            }
        }
    }
    try {
        return Unitary(std::move(u));
    } catch (const NonUnitaryError &e) {
        throw InvalidAttackError(std::string("completed coupling is not unitary: ") + e.what());
    }
}

AttackUnitaries build_attack_unitaries(const AttackParams &params) {
    params.validate();
    return AttackUnitaries{build_leg_unitary(params.source), build_leg_unitary(params.alice_leg),
                           build_leg_unitary(params.bob_leg)};
}

double no_detection_residual(const AttackParams &p) {
    double s = std::norm(p.source.plus_minus) + std::norm(p.alice_leg.plus_minus) +
               std::norm(p.alice_leg.minus_plus) + std::norm(p.bob_leg.plus_minus) + std::norm(p.bob_leg.minus_plus);
    // A1|F1> - B2|G2>: the Alice->Bob leg must not mark which X state passed.
    const auto &f1 = p.alice_leg.mark_plus_plus;
    const auto &g2 = p.alice_leg.mark_minus_minus;
    for (std::size_t i = 0; i < f1.size() && i < g2.size(); ++i) {
        s += std::norm(p.alice_leg.plus_plus * f1[i] - p.alice_leg.minus_minus * g2[i]);
    }
    return std::sqrt(s);
}

std::string describe(const AttackStrategy &strategy) {
    if (std::holds_alternative<NoAttack>(strategy)) {
        return "null";
    }
    if (const auto *ir = std::get_if<InterceptResend>(&strategy)) {
        return "intercept:" + std::string(to_string(ir->basis)) + ":" + std::string(to_string(ir->segment));
    }
    const auto &params = std::get<Collective>(strategy).params;
    std::ostringstream out;
    out.precision(6);
    out << "collective(residual=" << no_detection_residual(params) << ")";
    return out.str();
}

std::unique_ptr<AdversaryHook> make_hook(const AttackStrategy &strategy) {
    if (std::holds_alternative<NoAttack>(strategy)) {
        return std::make_unique<NullAdversary>();
    }
    if (const auto *ir = std::get_if<InterceptResend>(&strategy)) {
        return std::make_unique<InterceptResendHook>(*ir);
    }
    return std::make_unique<CouplingHook>(compile(plan_for(strategy)), describe(strategy));
}

StateVector intercept_resend(const StateVector &state, Basis basis, Rng &rng) {
    return measure(state, 0, basis, rng.uniform01()).state;
}

AttackPlan plan_for(const AttackStrategy &strategy) {
    AttackPlan plan;
    if (const auto *ir = std::get_if<InterceptResend>(&strategy)) {
        LegCoupling copy;
        copy.ancilla_qubits = 1;
        copy.minus_specified = true;
        if (ir->basis == Basis::X) {
            // |+>|0> -> |+>|0>, |->|0> -> |->|1>
            copy.plus_plus = 1;
            copy.plus_minus = 0;
            copy.minus_plus = 0;
            copy.minus_minus = 1;
            copy.mark_plus_plus = basis_ket(2, 0);
            copy.mark_plus_minus = basis_ket(2, 1);
            copy.mark_minus_plus = basis_ket(2, 0);
            copy.mark_minus_minus = basis_ket(2, 1);
        } else {
            // CNOT |z>|0> -> |z>|z>, written in the X basis of the photon.
            const Ket plus{kInvSqrt2, kInvSqrt2};
            const Ket minus{kInvSqrt2, -kInvSqrt2};
            copy.plus_plus = kInvSqrt2;
            copy.plus_minus = kInvSqrt2;
            copy.minus_plus = kInvSqrt2;
            copy.minus_minus = kInvSqrt2;
            copy.mark_plus_plus = plus;
            copy.mark_plus_minus = minus;
            copy.mark_minus_plus = minus;
            copy.mark_minus_minus = plus;
        }
        plan[static_cast<std::size_t>(ir->segment)] = std::move(copy);
    } else if (const auto *c = std::get_if<Collective>(&strategy)) {
        c->params.validate();
        plan[static_cast<std::size_t>(Segment::TPtoAlice)] = c->params.source;
        plan[static_cast<std::size_t>(Segment::AliceToBob)] = c->params.alice_leg;
        plan[static_cast<std::size_t>(Segment::BobToTP)] = c->params.bob_leg;
    }
    return plan;
}

RoundDistribution evaluate_round(const AttackPlan &plan, UnitaryOp alice_op, UnitaryOp bob_op) {
    return evaluate_compiled(compile(plan), alice_op, bob_op);
}

RoundDistribution run_collective_round(const AttackParams &params, UnitaryOp alice_op, UnitaryOp bob_op) {
    return evaluate_round(plan_for(Collective{params}), alice_op, bob_op);
}

double eve_leakage(const AttackPlan &plan) { return leakage_compiled(compile(plan)); }

double eve_leakage(const AttackParams &params) { return eve_leakage(plan_for(Collective{params})); }

AttackOutcomeStats exact_stats(const AttackPlan &plan) { return exact_compiled(compile(plan)); }

AttackReport attack_report(const AttackStrategy &strategy, std::uint64_t n_rounds, std::uint64_t seed,
                           unsigned threads) {
    AttackReport report;
    report.strategy = describe(strategy);
    if (const auto *c = std::get_if<Collective>(&strategy)) {
        report.residual = no_detection_residual(c->params);
    }
    const CompiledPlan compiled = compile(plan_for(strategy));
    report.exact = exact_compiled(compiled);

    const auto hook = make_hook(strategy);
    SessionOptions options;
    options.threads = threads;
    const Transcript transcript = run_session(n_rounds, seed, *hook, options);

    const ErrorReport case1 = check_case1(transcript, 1.0);
    report.check_rounds = case1.check_rounds;
    report.empirical.detection_prob_case1 = case1.case1_error_rate;

    Rng disclosure_rng(derive_seed(seed, Stream::Disclosure, 0));
    const auto [key, disclosed] =
        disclose_and_compare(transcript, disclosure_rng, std::numeric_limits<std::uint64_t>::max());
    report.disclosed_count = disclosed.disclosed_count;
    report.empirical.disclosed_mismatch_prob = disclosed.disclosed_mismatch_rate();
    report.key_rounds = key.alice_raw.size();
    for (std::size_t i = 0; i < key.alice_raw.size(); ++i) {
        if (key.alice_raw[i] != key.bob_raw[i]) {
            ++report.key_mismatches;
        }
    }
    report.empirical.leakage_bits = report.exact.leakage_bits;
    return report;
}

Ket random_ket(std::size_t dim, Rng &rng) {
    while (true) {
        Ket k(dim);
        for (auto &z : k) {
            z = Complex(gaussian(rng), gaussian(rng));
        }
        const double n = std::sqrt(ket_norm_squared(k));
        if (n > 1e-6) {
            for (auto &z : k) {
                z /= n;
            }
            return k;
        }
    }
}

AttackParams sample_attack_params(Rng &rng) {
    AttackParams p = AttackParams::pass_through();
    {
        auto [keep, flip] = random_pair(rng);
        p.source.plus_plus = keep;
        p.source.plus_minus = flip;
        const auto marks = random_orthonormal_family(2, 2, rng);
        p.source.mark_plus_plus = marks[0];
        p.source.mark_plus_minus = marks[1];
        p.source.mark_minus_plus = marks[1];
        p.source.mark_minus_minus = marks[0];
    }
    for (LegCoupling *leg : {&p.alice_leg, &p.bob_leg}) {
        auto [pp, pm] = random_pair(rng);
        auto [mm, mp] = random_pair(rng);
        leg->plus_plus = pp;
        leg->plus_minus = pm;
        leg->minus_plus = mp;
        leg->minus_minus = mm;
        const auto marks = random_orthonormal_family(4, 4, rng);
        leg->mark_plus_plus = marks[0];
        leg->mark_plus_minus = marks[1];
        leg->mark_minus_plus = marks[2];
        leg->mark_minus_minus = marks[3];
    }
    return p;
}

AttackParams sample_undetectable_params(Rng &rng) {
    AttackParams p = AttackParams::pass_through();

    p.source.plus_plus = random_phase(rng);
    p.source.plus_minus = 0;
    p.source.mark_plus_plus = random_ket(2, rng);
    p.source.mark_plus_minus = random_ket(2, rng);
    p.source.mark_minus_plus = p.source.mark_plus_minus;
    p.source.mark_minus_minus = p.source.mark_plus_plus;

    // Alice->Bob: A1|F1> = B2|G2>; G1 and F2 orthogonal to F1.
    {
        auto &leg = p.alice_leg;
        leg.plus_plus = random_phase(rng);
        leg.minus_minus = random_phase(rng);
        leg.plus_minus = 0;
        leg.minus_plus = 0;
        leg.mark_plus_plus = random_ket(4, rng);
        leg.mark_minus_minus = leg.mark_plus_plus;
        const Complex ratio = leg.plus_plus / leg.minus_minus;
        for (auto &z : leg.mark_minus_minus) {
            z *= ratio;
        }
        leg.mark_plus_minus = random_orthogonal_ket(4, {leg.mark_plus_plus}, rng);
        leg.mark_minus_plus = random_orthogonal_ket(4, {leg.mark_plus_plus}, rng);
    }
    // Bob->TP: H1 and K2 free; K1 orthogonal to H1, H2 orthogonal to K2.
    {
        auto &leg = p.bob_leg;
        leg.plus_plus = random_phase(rng);
        leg.minus_minus = random_phase(rng);
        leg.plus_minus = 0;
        leg.minus_plus = 0;
        leg.mark_plus_plus = random_ket(4, rng);
        leg.mark_minus_minus = random_ket(4, rng);
        leg.mark_minus_plus = random_orthogonal_ket(4, {leg.mark_plus_plus}, rng);
        leg.mark_plus_minus = random_orthogonal_ket(4, {leg.mark_minus_minus}, rng);
    }
    return p;
}

AttackParams perturb_params(const AttackParams &params, double magnitude, Rng &rng) {
    AttackParams p = params;
    // (keep, flip) pairs: a1/a2, A1/A2, B2/B1, C1/C2, D2/D1.
    std::array<std::pair<Complex *, Complex *>, 5> pairs{{
        {&p.source.plus_plus, &p.source.plus_minus},
        {&p.alice_leg.plus_plus, &p.alice_leg.plus_minus},
        {&p.alice_leg.minus_minus, &p.alice_leg.minus_plus},
        {&p.bob_leg.plus_plus, &p.bob_leg.plus_minus},
        {&p.bob_leg.minus_minus, &p.bob_leg.minus_plus},
    }};
    std::array<Complex, 5> direction;
    double n = 0;
    for (auto &d : direction) {
        d = Complex(gaussian(rng), gaussian(rng));
        n += std::norm(d);
    }
    n = std::sqrt(n);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Complex &keep = *pairs[i].first;
        Complex &flip = *pairs[i].second;
        flip += direction[i] * (magnitude / n);
        const double f = std::norm(flip);
        if (f > 1.0) {
            throw InvalidAttackError("perturbation pushes a flip amplitude above 1");
        }
        const double keep_mag = std::abs(keep);
        const Complex phase = keep_mag > 0 ? keep / keep_mag : Complex{1};
        keep = phase * std::sqrt(1.0 - f);
    }
    return p;
}

}  // namespace mqkd
