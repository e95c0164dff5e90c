#pragma once

// First-order Takagi-Sugeno inference with Gaussian memberships.
//
// A model maps x in [0,1]^n to
//   y = sum_r w_r(x) * (a_r0 + sum_i a_ri * x_i) / sum_r w_r(x),
// where w_r is the product of rule r's membership degrees. Everything here is
// templated on the scalar type; the rest of the library uses TskModel (double).

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "countermachine/errors.hpp"

namespace cfm {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Normalized antecedent values, one per model input.
using FeatureVector = Eigen::VectorXd;

/// Total activation below this is clamped and flagged.
inline constexpr double kMinTotalActivation = 1e-12;

enum class Label { War, Peace };

inline std::string_view to_string(Label label) { return label == Label::War ? "war" : "peace"; }

inline Label parse_label(std::string_view text) {
    if (text == "war") return Label::War;
    if (text == "peace") return Label::Peace;
    throw InvalidArgument("unknown label '" + std::string(text) + "' (expected war or peace)");
}

/// Which consequent values stand for War and Peace, and where the boundary is.
struct LabelEncoding {
    double war = 1.0;
    double peace = 0.0;
    double threshold = 0.5;

    double value_of(Label label) const { return label == Label::War ? war : peace; }

    /// Ties at the threshold go to War.
    template <typename Scalar>
    Label classify(Scalar y) const {
        if (war >= peace) return y >= Scalar(threshold) ? Label::War : Label::Peace;
        return y <= Scalar(threshold) ? Label::War : Label::Peace;
    }

    bool operator==(const LabelEncoding&) const = default;
};

template <typename Scalar>
struct Gaussian {
    Scalar center{0};
    Scalar width{1};
};

template <typename Scalar>
Scalar mf_value(const Gaussian<Scalar>& mf, Scalar x) {
    using std::exp;
    const Scalar d = x - mf.center;
    return exp(-(d * d) / (Scalar(2) * mf.width * mf.width));
}

template <typename Scalar>
struct Rule {
    std::vector<Eigen::Index> mf_indices;
    /// Constant term first, then one coefficient per input.
    VectorX<Scalar> coeffs;
};

template <typename Scalar>
class BasicTskModel {
public:
    using Membership = Gaussian<Scalar>;
    using MembershipTable = std::vector<std::vector<Membership>>;

    BasicTskModel(std::vector<std::string> feature_names, MembershipTable mfs, const std::vector<Rule<Scalar>>& rules,
                  LabelEncoding encoding = {})
        : feature_names_(std::move(feature_names)), mfs_(std::move(mfs)), encoding_(encoding) {
        const auto n = static_cast<Eigen::Index>(feature_names_.size());
        if (n == 0) throw MalformedModel("model needs at least one input");
        if (std::set<std::string>(feature_names_.begin(), feature_names_.end()).size() != feature_names_.size())
            throw MalformedModel("feature names must be unique");
        if (static_cast<Eigen::Index>(mfs_.size()) != n)
            throw MalformedModel("expected membership functions for " + std::to_string(n) + " inputs, got " +
                                 std::to_string(mfs_.size()));
        for (std::size_t i = 0; i < mfs_.size(); ++i) {
            if (mfs_[i].empty()) throw MalformedModel("input " + std::to_string(i) + " has no membership functions");
            for (const auto& mf : mfs_[i]) {
                if (!(mf.width > Scalar(0)) || !std::isfinite(static_cast<double>(mf.width)) ||
                    !std::isfinite(static_cast<double>(mf.center)))
                    throw MalformedModel("input " + std::to_string(i) + ": membership width must be finite and > 0");
            }
        }
        if (rules.empty()) throw MalformedModel("rule base is empty");

        rule_mfs_.resize(static_cast<Eigen::Index>(rules.size()), n);
        coeffs_.resize(static_cast<Eigen::Index>(rules.size()), n + 1);
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            const auto row = static_cast<Eigen::Index>(r);
            if (static_cast<Eigen::Index>(rule.mf_indices.size()) != n)
                throw MalformedModel("rule " + std::to_string(r) + ": expected " + std::to_string(n) +
                                     " membership indices");
            if (rule.coeffs.size() != n + 1)
                throw MalformedModel("rule " + std::to_string(r) + ": expected " + std::to_string(n + 1) +
                                     " consequent coefficients");
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto idx = rule.mf_indices[static_cast<std::size_t>(i)];
                if (idx < 0 || idx >= static_cast<Eigen::Index>(mfs_[static_cast<std::size_t>(i)].size()))
                    throw MalformedModel("rule " + std::to_string(r) + ": membership index " + std::to_string(idx) +
                                         " out of range for input " + std::to_string(i));
                rule_mfs_(row, i) = idx;
            }
            if (!rule.coeffs.allFinite())
                throw MalformedModel("rule " + std::to_string(r) + ": non-finite consequent coefficient");
            coeffs_.row(row) = rule.coeffs.transpose();
        }
    }

    Eigen::Index n_inputs() const { return static_cast<Eigen::Index>(feature_names_.size()); }
    Eigen::Index n_rules() const { return coeffs_.rows(); }

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const MembershipTable& memberships() const { return mfs_; }
    const LabelEncoding& label_encoding() const { return encoding_; }

    /// Rules x inputs table of membership indices.
    const Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic>& rule_memberships() const { return rule_mfs_; }
    /// Rules x (inputs + 1) consequent coefficients, constant term in column 0.
    const MatrixX<Scalar>& consequents() const { return coeffs_; }

    std::vector<Rule<Scalar>> rules() const {
        std::vector<Rule<Scalar>> out(static_cast<std::size_t>(n_rules()));
        for (Eigen::Index r = 0; r < n_rules(); ++r) {
            auto& rule = out[static_cast<std::size_t>(r)];
            for (Eigen::Index i = 0; i < n_inputs(); ++i) rule.mf_indices.push_back(rule_mfs_(r, i));
            rule.coeffs = coeffs_.row(r).transpose();
        }
        return out;
    }

    BasicTskModel with_consequents(const MatrixX<Scalar>& coeffs) const {
        if (coeffs.rows() != coeffs_.rows() || coeffs.cols() != coeffs_.cols())
            throw MalformedModel("consequent matrix has the wrong shape");
        auto rs = rules();
        for (Eigen::Index r = 0; r < n_rules(); ++r) rs[static_cast<std::size_t>(r)].coeffs = coeffs.row(r).transpose();
        return BasicTskModel(feature_names_, mfs_, rs, encoding_);
    }

    BasicTskModel with_memberships(MembershipTable mfs) const {
        return BasicTskModel(feature_names_, std::move(mfs), rules(), encoding_);
    }

private:
    std::vector<std::string> feature_names_;
    MembershipTable mfs_;
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> rule_mfs_;
    MatrixX<Scalar> coeffs_;
    LabelEncoding encoding_;
};

using TskModel = BasicTskModel<double>;

template <typename Scalar, typename Derived>
void check_dimension(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != model.n_inputs())
        throw DimensionMismatch(static_cast<std::size_t>(model.n_inputs()), static_cast<std::size_t>(x.size()));
}

/// Per-input membership degrees: result[i][j] = mf_value(mfs[i][j], x[i]).
template <typename Scalar, typename Derived>
std::vector<std::vector<Scalar>> membership_degrees(const BasicTskModel<Scalar>& model,
                                                    const Eigen::MatrixBase<Derived>& x) {
    check_dimension(model, x);
    const auto& mfs = model.memberships();
    std::vector<std::vector<Scalar>> mu(mfs.size());
    for (std::size_t i = 0; i < mfs.size(); ++i) {
        mu[i].reserve(mfs[i].size());
        for (const auto& mf : mfs[i]) mu[i].push_back(mf_value(mf, Scalar(x(static_cast<Eigen::Index>(i)))));
    }
    return mu;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> firing_strengths(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    const auto mu = membership_degrees(model, x);
    const auto& table = model.rule_memberships();
    VectorX<Scalar> w(model.n_rules());
    for (Eigen::Index r = 0; r < model.n_rules(); ++r) {
        Scalar prod(1);
        for (Eigen::Index i = 0; i < model.n_inputs(); ++i) prod *= mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(table(r, i))];
        w(r) = prod;
    }
    return w;
}

/// Affine consequent output of every rule at x.
template <typename Scalar, typename Derived>
VectorX<Scalar> rule_outputs(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    check_dimension(model, x);
    const auto& a = model.consequents();
    return a.col(0) + a.rightCols(model.n_inputs()) * x.template cast<Scalar>();
}

template <typename Scalar>
struct Evaluation {
    Scalar y{0};
    /// Total activation fell below kMinTotalActivation and was clamped.
    bool degenerate = false;
};

template <typename Scalar, typename Derived>
Evaluation<Scalar> evaluate(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    const VectorX<Scalar> w = firing_strengths(model, x);
    const VectorX<Scalar> f = rule_outputs(model, x);
    Scalar total = w.sum();
    Evaluation<Scalar> out;
    if (total < Scalar(kMinTotalActivation)) {
        total = Scalar(kMinTotalActivation);
        out.degenerate = true;
    }
    out.y = w.dot(f) / total;
    return out;
}

template <typename Scalar, typename Derived>
Label classify(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    return model.label_encoding().classify(evaluate(model, x).y);
}

/// Throws unless x has the model's dimension and every value is finite and in [0, 1].
template <typename Scalar, typename Derived>
void validate_features(const BasicTskModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    check_dimension(model, x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = static_cast<double>(x(i));
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw InvalidArgument("feature '" + model.feature_names()[static_cast<std::size_t>(i)] + "' = " +
                                  std::to_string(v) + " is outside [0, 1]");
    }
}

}  // namespace cfm
