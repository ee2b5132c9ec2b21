#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace censreg {

enum class LossKind {
    bisquare,   // Tukey's bounded loss, tuning constant c
    jump,       // 0 for |u| < 1, 1 for |u| >= 1 (least-median-of-squares scale)
    absolute,   // |u|, sign score (L1 / GM baselines)
    square,     // u^2 (least squares baseline)
};

// Symmetric loss with rho(0) = 0, nondecreasing in |u|. Bounded kinds expose
// their supremum `sup()`; unbounded kinds return +infinity there. The
// bisquare keeps the textbook normalization rho(u) = (c^2/6)(1-(1-(u/c)^2)^3)
// clamped at c^2/6, so psi is the familiar u(1-(u/c)^2)^2 on |u| <= c.
class LossFunction {
public:
    static LossFunction bisquare(double c) {
        if (!(c > 0)) throw std::invalid_argument("bisquare tuning constant must be > 0");
        return LossFunction(LossKind::bisquare, c);
    }
    static LossFunction jump() { return LossFunction(LossKind::jump, 1.0); }
    static LossFunction absolute_value() { return LossFunction(LossKind::absolute, 0.0); }
    static LossFunction square() { return LossFunction(LossKind::square, 0.0); }

    LossKind kind() const { return kind_; }
    double tuning() const { return c_; }

    bool bounded() const { return kind_ == LossKind::bisquare || kind_ == LossKind::jump; }
    bool differentiable() const { return kind_ != LossKind::jump; }

    // sup_u rho(u); +inf for unbounded kinds.
    double sup() const {
        switch (kind_) {
            case LossKind::bisquare: return c_ * c_ / 6.0;
            case LossKind::jump: return 1.0;
            default: return std::numeric_limits<double>::infinity();
        }
    }

    double rho(double u) const {
        switch (kind_) {
            case LossKind::bisquare: {
                const double t = u / c_;
                double m = 1.0 - t * t;
                if (m < 0.0) m = 0.0;
                return (c_ * c_ / 6.0) * (1.0 - m * m * m);
            }
            case LossKind::jump:
                return (u <= -1.0 || u >= 1.0) ? 1.0 : 0.0;
            case LossKind::absolute:
                return u < 0 ? -u : u;
            case LossKind::square:
                return u * u;
        }
        return 0.0;
    }

    // rho normalized to supremum 1 (bounded kinds only); this is the form in
    // which loss containment between a pair of losses is meaningful.
    double normalized(double u) const {
        if (!bounded()) throw std::logic_error("normalized() requires a bounded loss");
        return rho(u) / sup();
    }

    double psi(double u) const {
        switch (kind_) {
            case LossKind::bisquare: {
                const double t = u / c_;
                if (t <= -1.0 || t >= 1.0) return 0.0;
                const double m = 1.0 - t * t;
                return u * m * m;
            }
            case LossKind::jump:
                throw std::logic_error("psi undefined for the jump loss");
            case LossKind::absolute:
                return u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
            case LossKind::square:
                return 2.0 * u;
        }
        return 0.0;
    }

    // psi(u)/u with the limit value at u = 0; this is the IRWLS weight.
    double weight(double u) const {
        switch (kind_) {
            case LossKind::bisquare: {
                const double t = u / c_;
                if (t <= -1.0 || t >= 1.0) return 0.0;
                const double m = 1.0 - t * t;
                return m * m;
            }
            case LossKind::jump:
                throw std::logic_error("weight undefined for the jump loss");
            case LossKind::absolute:
                throw std::logic_error(
                    "absolute loss has no finite weight at 0; use a smoothed solver");
            case LossKind::square:
                return 2.0;
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind_) {
            case LossKind::bisquare: return "bisquare(" + std::to_string(c_) + ")";
            case LossKind::jump: return "jump";
            case LossKind::absolute: return "absolute";
            case LossKind::square: return "square";
        }
        return "?";
    }

private:
    LossFunction(LossKind kind, double c) : kind_(kind), c_(c) {}

    LossKind kind_;
    double c_;
};

// Right-hand side of the M-scale equation for a requested breakdown fraction:
// b = target * sup(rho).
double calibrate_b(const LossFunction& loss, double target_bdp);

// E[rho(u)] under the standard normal, by quadrature. Used to pick tuning
// constants such that E_Phi[rho] = target * sup(rho).
double normal_expected_rho(const LossFunction& loss);
double normal_expected_rho(const LossFunction& loss, double scale);

// Bisquare tuning constant whose normal-consistency ratio E_Phi[rho]/sup(rho)
// equals `target` (0.5 gives the classic 50% breakdown constant ~1.5476).
double bisquare_tuning_for_bdp(double target);

// Default tuning constants: 50%-breakdown initial stage and 95%-efficiency
// refinement stage under normal errors, no censoring.
inline constexpr double kDefaultInitialTuning = 1.5476;
inline constexpr double kDefaultEfficientTuning = 4.685;

}  // namespace censreg
