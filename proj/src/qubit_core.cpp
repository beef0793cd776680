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

#include "mqkd/qubit_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mqkd {

StateVector unchecked_state(std::vector<Complex> amps) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < amps.size()) {
        ++n;
    }
    return StateVector(std::move(amps), n);
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t bit_of(std::size_t num_qubits, std::size_t qubit) {
    return std::size_t{1} << (num_qubits - 1 - qubit);
}

void check_target(const StateVector &state, std::size_t target) {
    if (target >= state.num_qubits()) {
        throw std::out_of_range("qubit index " + std::to_string(target) + " out of range for a " +
                                std::to_string(state.num_qubits()) + "-qubit state");
    }
}

StateVector apply_checked_dims(const StateVector &state, const Matrix &m, std::span<const std::size_t> targets) {
    const std::size_t k = targets.size();
    if (k == 0 || m.dim() != (std::size_t{1} << k)) {
        throw std::invalid_argument("matrix dimension does not match the number of target qubits");
    }
    for (std::size_t i = 0; i < k; ++i) {
        check_target(state, targets[i]);
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[i] == targets[j]) {
                throw std::invalid_argument("duplicate target qubit");
            }
        }
    }

    const std::size_t n = state.num_qubits();
    const std::size_t sub = m.dim();
    std::vector<std::size_t> offsets(sub, 0);
    std::size_t target_mask = 0;
    for (std::size_t s = 0; s < sub; ++s) {
        for (std::size_t i = 0; i < k; ++i) {
            if (s & (std::size_t{1} << (k - 1 - i))) {
                offsets[s] |= bit_of(n, targets[i]);
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        target_mask |= bit_of(n, targets[i]);
    }

    auto src = state.amplitudes();
    std::vector<Complex> out(src.size());
    std::vector<Complex> gathered(sub);
    for (std::size_t base = 0; base < src.size(); ++base) {
        if (base & target_mask) {
            continue;
        }
        for (std::size_t s = 0; s < sub; ++s) {
            gathered[s] = src[base | offsets[s]];
        }
        for (std::size_t r = 0; r < sub; ++r) {
            Complex acc = 0;
            for (std::size_t c = 0; c < sub; ++c) {
                acc += m(r, c) * gathered[c];
            }
            out[base | offsets[r]] = acc;
        }
    }
    return unchecked_state(std::move(out));
}

}  // namespace

std::string_view to_string(UnitaryOp op) {
    switch (op) {
        case UnitaryOp::Identity:
            return "I";
        case UnitaryOp::PauliZ:
            return "Z";
        case UnitaryOp::Hadamard:
            return "H";
    }
    return "?";
}

std::string_view to_string(Basis basis) { return basis == Basis::X ? "X" : "Z"; }

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Plus:
            return "+";
        case Outcome::Minus:
            return "-";
        case Outcome::Zero:
            return "0";
        case Outcome::One:
            return "1";
    }
    return "?";
}

Basis basis_of(Outcome outcome) {
    return (outcome == Outcome::Plus || outcome == Outcome::Minus) ? Basis::X : Basis::Z;
}

Matrix::Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

Matrix::Matrix(std::size_t dim, std::initializer_list<Complex> row_major) : dim_(dim), data_(row_major) {
    if (data_.size() != dim * dim) {
        throw std::invalid_argument("matrix initializer has the wrong number of entries");
    }
}

Matrix Matrix::identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = 1;
    }
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

Matrix Matrix::operator*(const Matrix &rhs) const {
    if (rhs.dim_ != dim_) {
        throw std::invalid_argument("matrix dimension mismatch");
    }
    Matrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t k = 0; k < dim_; ++k) {
            const Complex a = (*this)(r, k);
            for (std::size_t c = 0; c < dim_; ++c) {
                out(r, c) += a * rhs(k, c);
            }
        }
    }
    return out;
}

double Matrix::max_abs_diff(const Matrix &other) const {
    if (other.dim_ != dim_) {
        throw std::invalid_argument("matrix dimension mismatch");
    }
    double worst = 0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
    }
    return worst;
}

bool Matrix::is_unitary(double tolerance) const {
    if (dim_ == 0) {
        return false;
    }
    for (const auto &z : data_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            return false;
        }
    }
    return (adjoint() * (*this)).max_abs_diff(identity(dim_)) <= tolerance;
}

const Matrix &op_matrix(UnitaryOp op) {
    static const Matrix kIdentity = Matrix::identity(2);
    static const Matrix kPauliZ(2, {1, 0, 0, -1});
    static const Matrix kHadamard(2, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
    switch (op) {
        case UnitaryOp::Identity:
            return kIdentity;
        case UnitaryOp::PauliZ:
            return kPauliZ;
        case UnitaryOp::Hadamard:
            return kHadamard;
    }
    throw std::invalid_argument("unknown operation");
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amps) {
    if (!is_power_of_two(amps.size())) {
        throw std::invalid_argument("state length must be a power of two");
    }
    double norm = 0;
    for (const auto &z : amps) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw std::invalid_argument("state amplitudes must be finite");
        }
        norm += std::norm(z);
    }
    if (std::abs(norm - 1.0) > kStateTolerance) {
        throw std::invalid_argument("state is not normalized");
    }
    return unchecked_state(std::move(amps));
}

StateVector StateVector::basis_state(std::size_t num_qubits, std::size_t index) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (index >= dim) {
        throw std::out_of_range("basis index out of range");
    }
    std::vector<Complex> amps(dim);
    amps[index] = 1;
    return unchecked_state(std::move(amps));
}

double StateVector::norm_squared() const {
    double s = 0;
    for (const auto &z : amps_) {
        s += std::norm(z);
    }
    return s;
}

StateVector ket_zero() { return StateVector::basis_state(1, 0); }
StateVector ket_one() { return StateVector::basis_state(1, 1); }
StateVector ket_plus() { return unchecked_state({kInvSqrt2, kInvSqrt2}); }
StateVector ket_minus() { return unchecked_state({kInvSqrt2, -kInvSqrt2}); }

StateVector prepare_plus() { return ket_plus(); }

Unitary::Unitary(Matrix m, double tolerance) : m_(std::move(m)) {
    if (!m_.is_unitary(tolerance)) {
        throw NonUnitaryError("matrix is not unitary within tolerance");
    }
}

StateVector apply_op(const StateVector &state, UnitaryOp op, std::size_t target) {
    check_target(state, target);
    const std::size_t n = state.num_qubits();
    const std::size_t bit = bit_of(n, target);
    auto src = state.amplitudes();
    std::vector<Complex> out(src.begin(), src.end());
    switch (op) {
        case UnitaryOp::Identity:
            break;
        case UnitaryOp::PauliZ:
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (i & bit) {
                    out[i] = -out[i];
                }
            }
            break;
        case UnitaryOp::Hadamard:
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (!(i & bit)) {
                    const Complex a0 = src[i];
                    const Complex a1 = src[i | bit];
                    out[i] = (a0 + a1) * kInvSqrt2;
                    out[i | bit] = (a0 - a1) * kInvSqrt2;
                }
            }
            break;
    }
    return unchecked_state(std::move(out));
}

StateVector apply_matrix(const StateVector &state, const Matrix &matrix, std::span<const std::size_t> targets) {
    if (!matrix.is_unitary(kStateTolerance)) {
        throw NonUnitaryError("matrix is not unitary within tolerance");
    }
    return apply_checked_dims(state, matrix, targets);
}

StateVector apply_unitary(const StateVector &state, const Unitary &unitary, std::span<const std::size_t> targets) {
    return apply_checked_dims(state, unitary.matrix(), targets);
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    auto x = a.amplitudes();
    auto y = b.amplitudes();
    std::vector<Complex> out;
    out.reserve(x.size() * y.size());
    for (const auto &u : x) {
        for (const auto &v : y) {
            out.push_back(u * v);
        }
    }
    return unchecked_state(std::move(out));
}

namespace {

// Amplitudes of the component of `state` along `outcome` on `target`, left
// unnormalized.
std::vector<Complex> project(const StateVector &state, std::size_t target, Outcome outcome) {
    const std::size_t bit = bit_of(state.num_qubits(), target);
    auto src = state.amplitudes();
    std::vector<Complex> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (i & bit) {
            continue;
        }
        const Complex a0 = src[i];
        const Complex a1 = src[i | bit];
        switch (outcome) {
            case Outcome::Zero:
                out[i] = a0;
                break;
            case Outcome::One:
                out[i | bit] = a1;
                break;
            case Outcome::Plus: {
                const Complex c = (a0 + a1) * 0.5;
                out[i] = c;
                out[i | bit] = c;
                break;
            }
            case Outcome::Minus: {
                const Complex c = (a0 - a1) * 0.5;
                out[i] = c;
                out[i | bit] = -c;
                break;
            }
        }
    }
    return out;
}

double squared_norm(const std::vector<Complex> &v) {
    double s = 0;
    for (const auto &z : v) {
        s += std::norm(z);
    }
    return s;
}

}  // namespace

double outcome_probability(const StateVector &state, std::size_t target, Outcome outcome) {
    check_target(state, target);
    return squared_norm(project(state, target, outcome));
}

Measurement measure(const StateVector &state, std::size_t target, Basis basis, double rand) {
    check_target(state, target);
    const Outcome first = basis == Basis::X ? Outcome::Plus : Outcome::Zero;
    const Outcome second = basis == Basis::X ? Outcome::Minus : Outcome::One;

    auto first_branch = project(state, target, first);
    const double p_first = squared_norm(first_branch);
    auto second_branch = project(state, target, second);
    const double p_second = squared_norm(second_branch);

    bool take_first = rand < p_first;
    if (p_first < kZeroProbability) {
        take_first = false;
    } else if (p_second < kZeroProbability) {
        take_first = true;
    }

    auto &chosen = take_first ? first_branch : second_branch;
    const double p = take_first ? p_first : p_second;
    const double scale = 1.0 / std::sqrt(p);
    for (auto &z : chosen) {
        z *= scale;
    }
    return Measurement{take_first ? first : second, p, unchecked_state(std::move(chosen))};
}

Complex inner_product(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("state dimension mismatch");
    }
    Complex acc = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

double fidelity(const StateVector &a, const StateVector &b) { return std::norm(inner_product(a, b)); }

}  // namespace mqkd
