#include "countermachine/training.hpp"

#include <cmath>
#include <limits>

namespace cfm {

void TrainConfig::validate() const {
    if (mfs_per_input < 1) throw InvalidArgument("mfs_per_input must be >= 1");
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (!(premise_learning_rate > 0.0) || !std::isfinite(premise_learning_rate))
        throw InvalidArgument("premise_learning_rate must be > 0");
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) throw InvalidArgument("ridge_lambda must be >= 0");
}

nlohmann::json to_json(const TrainReport& report) {
    return {{"loss", report.loss}, {"train_acc", report.train_acc}, {"test_acc", report.test_acc}};
}

TskModel init_grid(std::vector<std::string> feature_names, const TrainConfig& config, const LabelEncoding& encoding) {
    config.validate();
    const std::size_t n = feature_names.size();
    const auto m = static_cast<std::size_t>(config.mfs_per_input);

    std::size_t n_rules = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (n_rules > config.rule_cap / m + 1) {
            n_rules = config.rule_cap + 1;
            break;
        }
        n_rules *= m;
    }
    if (n_rules > config.rule_cap)
        throw RuleCapExceeded(std::to_string(m) + "^" + std::to_string(n) + " grid rules exceed the cap of " +
                              std::to_string(config.rule_cap));

    const double width = m == 1 ? 0.5 : 1.0 / (2.0 * static_cast<double>(m - 1));
    std::vector<Gaussian<double>> row;
    for (std::size_t j = 0; j < m; ++j) {
        const double center = m == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(m - 1);
        row.push_back({center, width});
    }
    TskModel::MembershipTable mfs(n, row);

    // Odometer over MF indices; the last input varies fastest.
    std::vector<Rule<double>> rules;
    rules.reserve(n_rules);
    std::vector<Eigen::Index> idx(n, 0);
    for (std::size_t r = 0; r < n_rules; ++r) {
        rules.push_back({idx, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1))});
        for (std::size_t i = n; i-- > 0;) {
            if (++idx[i] < static_cast<Eigen::Index>(m)) break;
            idx[i] = 0;
        }
    }
    return TskModel(std::move(feature_names), std::move(mfs), rules, encoding);
}

double mean_squared_error(const TskModel& model, const Samples& data) {
    if (data.size() == 0) return 0.0;
    double sum = 0.0;
    for (Eigen::Index k = 0; k < data.size(); ++k) {
        const double e = evaluate(model, data.x.row(k).transpose()).y - data.t(k);
        sum += e * e;
    }
    return sum / static_cast<double>(data.size());
}

double accuracy(const TskModel& model, const Samples& data) {
    if (data.size() == 0) return 0.0;
    const auto& enc = model.label_encoding();
    Eigen::Index hits = 0;
    for (Eigen::Index k = 0; k < data.size(); ++k)
        if (classify(model, data.x.row(k).transpose()) == enc.classify(data.t(k))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

void check_samples(const TskModel& model, const Samples& data) {
    if (data.size() == 0) throw InvalidArgument("dataset is empty");
    if (data.x.cols() != model.n_inputs())
        throw DimensionMismatch(static_cast<std::size_t>(model.n_inputs()), static_cast<std::size_t>(data.x.cols()));
    if (data.t.size() != data.x.rows())
        throw DimensionMismatch(static_cast<std::size_t>(data.x.rows()), static_cast<std::size_t>(data.t.size()));
}

}  // namespace

Eigen::MatrixXd consequent_design(const TskModel& model, const Samples& data) {
    check_samples(model, data);
    const Eigen::Index n = model.n_inputs();
    const Eigen::Index block = n + 1;
    Eigen::MatrixXd phi(data.size(), model.n_rules() * block);
    Eigen::VectorXd ext(block);
    for (Eigen::Index k = 0; k < data.size(); ++k) {
        const Eigen::VectorXd w = firing_strengths(model, data.x.row(k).transpose());
        const double total = std::max(w.sum(), kMinTotalActivation);
        ext(0) = 1.0;
        ext.tail(n) = data.x.row(k).transpose();
        for (Eigen::Index r = 0; r < model.n_rules(); ++r)
            phi.row(k).segment(r * block, block) = (w(r) / total) * ext.transpose();
    }
    return phi;
}

TskModel lse_consequents(const TskModel& model, const Samples& data, double ridge_lambda) {
    if (!(ridge_lambda >= 0.0)) throw InvalidArgument("ridge_lambda must be >= 0");
    const Eigen::MatrixXd phi = consequent_design(model, data);
    const Eigen::Index p = phi.cols();

    Eigen::VectorXd a;
    if (ridge_lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
        if (qr.rank() < p)
            throw SingularSystem("consequent system is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                                 std::to_string(p) + "); use a positive ridge_lambda");
        a = qr.solve(data.t);
    } else {
        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
        normal.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
        normal.diagonal().array() += ridge_lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal.selfadjointView<Eigen::Lower>());
        a = ldlt.solve(phi.transpose() * data.t);
    }
    if (!a.allFinite()) throw SingularSystem("consequent solve produced non-finite coefficients");

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::MatrixXd coeffs = Eigen::Map<const RowMajor>(a.data(), model.n_rules(), model.n_inputs() + 1);
    return model.with_consequents(coeffs);
}

Eigen::VectorXd premise_parameters(const TskModel& model) {
    std::vector<double> centers, widths;
    for (const auto& input : model.memberships())
        for (const auto& mf : input) {
            centers.push_back(mf.center);
            widths.push_back(mf.width);
        }
    Eigen::VectorXd out(static_cast<Eigen::Index>(centers.size() * 2));
    const auto half = static_cast<Eigen::Index>(centers.size());
    out.head(half) = Eigen::Map<const Eigen::VectorXd>(centers.data(), half);
    out.tail(half) = Eigen::Map<const Eigen::VectorXd>(widths.data(), half);
    return out;
}

TskModel with_premise_parameters(const TskModel& model, const Eigen::VectorXd& params) {
    auto mfs = model.memberships();
    Eigen::Index count = 0;
    for (const auto& input : mfs) count += static_cast<Eigen::Index>(input.size());
    if (params.size() != 2 * count)
        throw DimensionMismatch(static_cast<std::size_t>(2 * count), static_cast<std::size_t>(params.size()));
    Eigen::Index k = 0;
    for (auto& input : mfs)
        for (auto& mf : input) {
            mf.center = params(k);
            mf.width = params(count + k);
            ++k;
        }
    return model.with_memberships(std::move(mfs));
}

Eigen::VectorXd premise_gradient(const TskModel& model, const Samples& data) {
    check_samples(model, data);
    const auto& mfs = model.memberships();
    const auto& table = model.rule_memberships();
    const Eigen::Index n = model.n_inputs();

    // offset[i] = index of input i's first MF in the flattened layout.
    std::vector<Eigen::Index> offset(mfs.size() + 1, 0);
    for (std::size_t i = 0; i < mfs.size(); ++i) offset[i + 1] = offset[i] + static_cast<Eigen::Index>(mfs[i].size());
    const Eigen::Index count = offset.back();

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * count);
    const double scale = 2.0 / static_cast<double>(data.size());
    for (Eigen::Index k = 0; k < data.size(); ++k) {
        const Eigen::VectorXd x = data.x.row(k).transpose();
        const Eigen::VectorXd w = firing_strengths(model, x);
        const Eigen::VectorXd f = rule_outputs(model, x);
        double total = w.sum();
        const bool clamped = total < kMinTotalActivation;
        if (clamped) total = kMinTotalActivation;
        const double y = w.dot(f) / total;
        const double dl_dy = scale * (y - data.t(k));

        for (Eigen::Index r = 0; r < model.n_rules(); ++r) {
            // dL/dw_r * w_r; the Gaussian derivatives below are relative to w_r.
            const double g = dl_dy * (clamped ? f(r) : f(r) - y) / total * w(r);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto j = table(r, i);
                const auto& mf = mfs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                const double d = x(i) - mf.center;
                const double s2 = mf.width * mf.width;
                const Eigen::Index p = offset[static_cast<std::size_t>(i)] + j;
                grad(p) += g * d / s2;
                grad(count + p) += g * d * d / (s2 * mf.width);
            }
        }
    }
    return grad;
}

TskModel premise_gradient_step(const TskModel& model, const Samples& data, double learning_rate) {
    if (learning_rate == 0.0) return model;
    Eigen::VectorXd params = premise_parameters(model);
    params -= learning_rate * premise_gradient(model, data);
    const Eigen::Index half = params.size() / 2;
    params.tail(half) = params.tail(half).cwiseMax(kMinWidth);
    return with_premise_parameters(model, params);
}

FitResult fit(const Samples& train, const Samples& test, std::vector<std::string> feature_names,
              const TrainConfig& config, const LabelEncoding& encoding) {
    config.validate();
    if (test.size() > 0 && test.x.cols() != train.x.cols())
        throw DimensionMismatch(static_cast<std::size_t>(train.x.cols()), static_cast<std::size_t>(test.x.cols()));

    TskModel model = init_grid(std::move(feature_names), config, encoding);
    TskModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    TrainReport report;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        model = lse_consequents(model, train, config.ridge_lambda);
        const double loss = mean_squared_error(model, train);
        if (!std::isfinite(loss)) throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch));
        report.loss.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best = model;
        }
        if (epoch + 1 < config.epochs) model = premise_gradient_step(model, train, config.premise_learning_rate);
    }

    for (Eigen::Index k = 0; k < train.size(); ++k) {
        const double y = evaluate(best, train.x.row(k).transpose()).y;
        if (!(std::abs(y) <= kDivergenceBound))
            throw TrainingDiverged("fitted output " + std::to_string(y) + " on training sample " + std::to_string(k) +
                                   " exceeds the sanity bound");
    }

    report.train_acc = accuracy(best, train);
    report.test_acc = accuracy(best, test);
    return {std::move(best), std::move(report)};
}

}  // namespace cfm
