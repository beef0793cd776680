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

#ifndef MQKD_QUBIT_CORE_HPP
#define MQKD_QUBIT_CORE_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mqkd {

using Complex = std::complex<double>;

/// Tolerance for state invariants (norm, unitarity of supplied matrices).
inline constexpr double kStateTolerance = 1e-9;
/// Tolerance for static matrix identities.
inline constexpr double kMatrixTolerance = 1e-12;
/// Branches with probability below this are treated as impossible.
inline constexpr double kZeroProbability = 1e-14;

/// The single-photon operations available to a participant.
enum class UnitaryOp : std::uint8_t { Identity, PauliZ, Hadamard };

enum class Basis : std::uint8_t { X, Z };

/// Measurement outcome. Plus/Minus belong to X, Zero/One to Z.
enum class Outcome : std::uint8_t { Plus, Minus, Zero, One };

std::string_view to_string(UnitaryOp op);
std::string_view to_string(Basis basis);
std::string_view to_string(Outcome outcome);

Basis basis_of(Outcome outcome);

/// Raised when a matrix handed to apply_matrix is not unitary.
class NonUnitaryError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Dense square complex matrix, row-major.
class Matrix {
   public:
    Matrix() = default;
    explicit Matrix(std::size_t dim);
    Matrix(std::size_t dim, std::initializer_list<Complex> row_major);

    static Matrix identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    Complex &operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
    const Complex &operator()(std::size_t row, std::size_t col) const { return data_[row * dim_ + col]; }

    Matrix adjoint() const;
    Matrix operator*(const Matrix &rhs) const;

    /// Largest entry-wise deviation of this matrix from `other`.
    double max_abs_diff(const Matrix &other) const;
    bool is_unitary(double tolerance) const;

   private:
    std::size_t dim_ = 0;
    std::vector<Complex> data_;
};

/// 2x2 matrix of a participant operation.
const Matrix &op_matrix(UnitaryOp op);

/// Normalized pure state of one or more qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index, so
/// tensor(a, b) puts a's qubits before b's. In protocol use qubit 0 is always
/// the travel photon and ancilla registers follow in order of attachment.
class StateVector {
   public:
    /// Validates length (power of two), finiteness and unit norm.
    static StateVector from_amplitudes(std::vector<Complex> amps);
    /// Computational basis state |index> over num_qubits qubits.
    static StateVector basis_state(std::size_t num_qubits, std::size_t index);

    std::size_t dim() const { return amps_.size(); }
    std::size_t num_qubits() const { return num_qubits_; }
    std::span<const Complex> amplitudes() const { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }
    double norm_squared() const;

    bool operator==(const StateVector &) const = default;

   private:
    StateVector(std::vector<Complex> amps, std::size_t num_qubits)
        : amps_(std::move(amps)), num_qubits_(num_qubits) {}

    friend StateVector unchecked_state(std::vector<Complex> amps);

    std::vector<Complex> amps_;
    std::size_t num_qubits_ = 0;
};

StateVector ket_zero();
StateVector ket_one();
StateVector ket_plus();
StateVector ket_minus();

/// The photon TP emits at the start of every round.
StateVector prepare_plus();

/// A matrix validated as unitary once, so it can be applied repeatedly
/// without re-checking.
class Unitary {
   public:
    /// Throws NonUnitaryError if U^dagger U differs from I by more than tolerance.
    explicit Unitary(Matrix m, double tolerance = kStateTolerance);
    const Matrix &matrix() const { return m_; }
    std::size_t dim() const { return m_.dim(); }

   private:
    Matrix m_;
};

/// Applies a participant operation to one qubit.
StateVector apply_op(const StateVector &state, UnitaryOp op, std::size_t target);

/// Applies `matrix` to the listed qubits; targets[0] is the matrix's most
/// significant qubit. Throws NonUnitaryError for a non-unitary matrix,
/// std::invalid_argument for a dimension mismatch or repeated target and
/// std::out_of_range for a target past the last qubit.
StateVector apply_matrix(const StateVector &state, const Matrix &matrix, std::span<const std::size_t> targets);
StateVector apply_unitary(const StateVector &state, const Unitary &unitary, std::span<const std::size_t> targets);

/// Kronecker product; a's qubits come first.
StateVector tensor(const StateVector &a, const StateVector &b);

struct Measurement {
    Outcome outcome;
    double probability;
    StateVector state;
};

/// Probability that measuring `target` in the basis of `outcome` yields it.
double outcome_probability(const StateVector &state, std::size_t target, Outcome outcome);

/// Projective measurement of one qubit.
///
/// The first branch (Plus for X, Zero for Z) is taken when rand is below its
/// probability. A branch whose probability is below kZeroProbability is never
/// selected. The returned state is the renormalized post-measurement state.
Measurement measure(const StateVector &state, std::size_t target, Basis basis, double rand);

Complex inner_product(const StateVector &a, const StateVector &b);

/// |<a|b>|^2. Throws std::invalid_argument on dimension mismatch.
double fidelity(const StateVector &a, const StateVector &b);

}  // namespace mqkd

#endif
