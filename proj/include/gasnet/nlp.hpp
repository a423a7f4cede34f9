#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gasnet/error.hpp"

namespace gasnet {

/// Building blocks of the equality constraints. Every constraint row is
/// constant + sum of terms; each term is one of
///   Linear:        coef * x_i
///   Square:        coef * x_i^2
///   AbsSquare:     coef * x_i |x_i|
///   ProdAbsSquare: coef * x_j * x_i |x_i|   (j is a parameter variable)
enum class TermKind { Linear, Square, AbsSquare, ProdAbsSquare };

struct Term {
    TermKind kind = TermKind::Linear;
    int i = 0;
    int j = -1;
    double coef = 0.0;
};

/// weight * (x_var - target)^2
struct LsqAtom {
    int var = 0;
    double target = 0.0;
    double weight = 0.0;
};

enum class Quantity { Density, Flux, Withdrawal, Friction };

/// Maps a variable back to its physical meaning: value = scale * x.
struct VarInfo {
    Quantity quantity = Quantity::Density;
    int index = 0; // refined node, refined edge, physical junction or parent pipe
    int time = -1; // grid index, -1 for time-invariant parameters
    double scale = 1.0;
};

/// min sum_a w_a (x_a - t_a)^2  s.t.  c(x) = 0,  lower <= x <= upper.
class NlpProblem {
public:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    int add_variable(VarInfo info, double lower = -kInf, double upper = kInf) {
        detail::require(!(lower > upper), "variable lower bound exceeds upper bound");
        meta_.push_back(info);
        lower_.push_back(lower);
        upper_.push_back(upper);
        return static_cast<int>(meta_.size()) - 1;
    }

    void add_atom(LsqAtom a) {
        detail::require(a.weight >= 0.0, "least-squares weight must be non-negative");
        atoms_.push_back(a);
    }

    /// Starts a new constraint row and returns its index.
    int begin_row(double constant = 0.0) {
        row_ptr_.push_back(static_cast<int>(terms_.size()));
        constants_.push_back(constant);
        return static_cast<int>(constants_.size()) - 1;
    }
    void add_constant(double v) { constants_.back() += v; }
    void add_term(Term t) {
        detail::require(!constants_.empty(), "add_term before begin_row");
        if (t.coef == 0.0) return;
        terms_.push_back(t);
    }

    int num_variables() const { return static_cast<int>(meta_.size()); }
    int num_constraints() const { return static_cast<int>(constants_.size()); }
    const std::vector<VarInfo>& meta() const { return meta_; }
    const std::vector<LsqAtom>& atoms() const { return atoms_; }
    Eigen::VectorXd lower() const { return to_vec(lower_); }
    Eigen::VectorXd upper() const { return to_vec(upper_); }
    void set_bounds(int var, double lo, double hi) {
        detail::require(!(lo > hi), "variable lower bound exceeds upper bound");
        lower_.at(static_cast<std::size_t>(var)) = lo;
        upper_.at(static_cast<std::size_t>(var)) = hi;
    }

    /// Terms of row r as [first, last).
    std::pair<int, int> row_range(int r) const {
        const int first = row_ptr_[static_cast<std::size_t>(r)];
        const int last = r + 1 < num_constraints() ? row_ptr_[static_cast<std::size_t>(r) + 1] : static_cast<int>(terms_.size());
        return {first, last};
    }
    const std::vector<Term>& terms() const { return terms_; }

    double objective(const Eigen::VectorXd& x) const {
        double f = 0.0;
        for (const auto& a : atoms_) {
            const double r = x[a.var] - a.target;
            f += a.weight * r * r;
        }
        return f;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        for (const auto& a : atoms_) g[a.var] += 2.0 * a.weight * (x[a.var] - a.target);
        return g;
    }

    Eigen::VectorXd constraints(const Eigen::VectorXd& x) const {
        Eigen::VectorXd c(num_constraints());
        for (int r = 0; r < num_constraints(); ++r) {
            double v = constants_[static_cast<std::size_t>(r)];
            const auto [first, last] = row_range(r);
            for (int q = first; q < last; ++q) v += term_value(terms_[static_cast<std::size_t>(q)], x);
            c[r] = v;
        }
        return c;
    }

    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(terms_.size() + 8);
        for (int r = 0; r < num_constraints(); ++r) {
            const auto [first, last] = row_range(r);
            for (int q = first; q < last; ++q) {
                const Term& t = terms_[static_cast<std::size_t>(q)];
                const double xi = x[t.i];
                switch (t.kind) {
                case TermKind::Linear: trip.emplace_back(r, t.i, t.coef); break;
                case TermKind::Square: trip.emplace_back(r, t.i, 2.0 * t.coef * xi); break;
                case TermKind::AbsSquare: trip.emplace_back(r, t.i, 2.0 * t.coef * std::abs(xi)); break;
                case TermKind::ProdAbsSquare:
                    trip.emplace_back(r, t.i, 2.0 * t.coef * x[t.j] * std::abs(xi));
                    trip.emplace_back(r, t.j, t.coef * xi * std::abs(xi));
                    break;
                }
            }
        }
        Eigen::SparseMatrix<double> J(num_constraints(), num_variables());
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }

    /// Structural pattern of the Jacobian (every entry any term can touch).
    Eigen::SparseMatrix<double> jacobian_pattern() const {
        std::vector<Eigen::Triplet<double>> trip;
        for (int r = 0; r < num_constraints(); ++r) {
            const auto [first, last] = row_range(r);
            for (int q = first; q < last; ++q) {
                const Term& t = terms_[static_cast<std::size_t>(q)];
                trip.emplace_back(r, t.i, 1.0);
                if (t.kind == TermKind::ProdAbsSquare) trip.emplace_back(r, t.j, 1.0);
            }
        }
        Eigen::SparseMatrix<double> P(num_constraints(), num_variables());
        P.setFromTriplets(trip.begin(), trip.end(), [](double, double) { return 1.0; });
        return P;
    }

    /// Lower triangle of obj_factor * Hess f + sum_r y_r Hess c_r.
    Eigen::SparseMatrix<double> hessian_lower(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                              double obj_factor = 1.0) const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(atoms_.size() + terms_.size());
        for (const auto& a : atoms_) trip.emplace_back(a.var, a.var, 2.0 * obj_factor * a.weight);
        for (int r = 0; r < num_constraints(); ++r) {
            const double yr = y[r];
            if (yr == 0.0) continue;
            const auto [first, last] = row_range(r);
            for (int q = first; q < last; ++q) {
                const Term& t = terms_[static_cast<std::size_t>(q)];
                const double xi = x[t.i];
                switch (t.kind) {
                case TermKind::Linear: break;
                case TermKind::Square: trip.emplace_back(t.i, t.i, 2.0 * yr * t.coef); break;
                case TermKind::AbsSquare: trip.emplace_back(t.i, t.i, 2.0 * yr * t.coef * sgn(xi)); break;
                case TermKind::ProdAbsSquare: {
                    trip.emplace_back(t.i, t.i, 2.0 * yr * t.coef * x[t.j] * sgn(xi));
                    const double off = 2.0 * yr * t.coef * std::abs(xi);
                    if (t.i > t.j) trip.emplace_back(t.i, t.j, off);
                    else trip.emplace_back(t.j, t.i, off);
                    break;
                }
                }
            }
        }
        Eigen::SparseMatrix<double> H(num_variables(), num_variables());
        H.setFromTriplets(trip.begin(), trip.end());
        return H;
    }

private:
    static double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

    static double term_value(const Term& t, const Eigen::VectorXd& x) {
        const double xi = x[t.i];
        switch (t.kind) {
        case TermKind::Linear: return t.coef * xi;
        case TermKind::Square: return t.coef * xi * xi;
        case TermKind::AbsSquare: return t.coef * xi * std::abs(xi);
        case TermKind::ProdAbsSquare: return t.coef * x[t.j] * xi * std::abs(xi);
        }
        return 0.0;
    }

    static Eigen::VectorXd to_vec(const std::vector<double>& v) {
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    std::vector<VarInfo> meta_;
    std::vector<double> lower_, upper_;
    std::vector<LsqAtom> atoms_;
    std::vector<double> constants_;
    std::vector<int> row_ptr_;
    std::vector<Term> terms_;
};

} // namespace gasnet
