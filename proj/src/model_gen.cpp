#include "mxpl/model_gen.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "mxpl/rng.hpp"

namespace mxpl {

namespace {

constexpr double kMaxEntries = 2.0e9;

void check_dimensions(double rows, double cols) {
    if (rows * cols > kMaxEntries || rows > static_cast<double>(std::numeric_limits<int>::max()))
        throw Error("dataset dimensions overflow");
}

Eigen::VectorXd draw_coefficients(const ModelConfig& c, int count) {
    const NormalField field(c.seed, c.replicate, Purpose::coefficient);
    Eigen::VectorXd b(count);
    for (int j = 0; j < count; ++j) b[j] = c.signal.draw(field.uniform(static_cast<std::uint64_t>(j), 0));
    return b;
}

// Row i of the design stream: focal layout is [x, z_1..z_{p-1}, eps],
// full layout is [x_1..x_p, eps]. Both use p + 1 columns.
void fill_design_row(const NormalField& field, std::uint64_t row, int p, std::vector<double>& buf) {
    buf.resize(static_cast<std::size_t>(p) + 1);
    field.fill_row(row, 0, static_cast<std::uint32_t>(p + 1), buf.data());
}

}  // namespace

void ModelConfig::validate() const {
    if (n < 1) throw Error("n must be >= 1");
    if (p < 1) throw Error("p must be >= 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error("sigma2 must be positive");
    if (!std::isfinite(h)) throw Error("h must be finite");
    if (unlabeled_m < 0) throw Error("unlabeled_m must be >= 0");
    if (screen_threshold && !(*screen_threshold >= 0.0)) throw Error("screen threshold must be >= 0");
    check_dimensions(static_cast<double>(n) + unlabeled_m, static_cast<double>(p) + 1);
}

double ModelConfig::v_z2() const noexcept { return kappa() * signal.second_moment(); }

int Dataset::total_rows() const noexcept {
    return is_focal() ? static_cast<int>(focal_x->size()) : static_cast<int>(X.rows());
}

Eigen::VectorXd Dataset::labeled_x() const {
    if (!is_focal()) throw Error("dataset has no focal column");
    return focal_x->head(labeled_n);
}

Eigen::MatrixXd Dataset::labeled_z() const {
    if (!is_focal()) throw Error("dataset has no focal column");
    return Z.topRows(labeled_n);
}

Dataset generate_setting1(const ModelConfig& config) {
    config.validate();
    if (config.p < 2) throw Error("the focal setting needs p >= 2");
    const int n = config.n;
    const int d = config.p - 1;
    const int rows = n + config.unlabeled_m;
    const double root_n = std::sqrt(static_cast<double>(n));
    const double sigma = std::sqrt(config.sigma2);

    Dataset data;
    data.labeled_n = n;
    data.raw_draws = n;
    data.beta_truth.resize(config.p);
    data.beta_truth[0] = config.h;
    data.beta_truth.tail(d) = draw_coefficients(config, d);
    const Eigen::VectorXd theta = data.beta_truth.tail(d) / root_n;

    Eigen::VectorXd x(rows);
    data.Z.resize(rows, d);
    data.y.resize(n);
    const NormalField field(config.seed, config.replicate, Purpose::design);
    std::vector<double> buf;
    for (int i = 0; i < rows; ++i) {
        fill_design_row(field, static_cast<std::uint64_t>(i), config.p, buf);
        x[i] = buf[0];
        double signal = 0.0;
        for (int j = 0; j < d; ++j) {
            data.Z(i, j) = buf[j + 1];
            signal += buf[j + 1] * theta[j];
        }
        if (i < n) data.y[i] = config.h / root_n * buf[0] + signal + sigma * buf[config.p];
    }
    data.focal_x = std::move(x);
    return data;
}

Dataset generate_setting2(const ModelConfig& config) {
    config.validate();
    const int n = config.n;
    const int p = config.p;
    const double root_n = std::sqrt(static_cast<double>(n));
    const double sigma = std::sqrt(config.sigma2);

    Dataset data;
    data.labeled_n = n;
    data.raw_draws = n;
    data.beta_truth = draw_coefficients(config, p);
    const Eigen::VectorXd beta = data.beta_truth / root_n;

    data.X.resize(n, p);
    data.y.resize(n);
    const NormalField field(config.seed, config.replicate, Purpose::design);
    std::vector<double> buf;
    for (int i = 0; i < n; ++i) {
        fill_design_row(field, static_cast<std::uint64_t>(i), p, buf);
        double signal = 0.0;
        for (int j = 0; j < p; ++j) {
            data.X(i, j) = buf[j];
            signal += buf[j] * beta[j];
        }
        data.y[i] = signal + sigma * buf[p];
    }
    return data;
}

Dataset generate_retrospective(const ModelConfig& config) {
    config.validate();
    if (!config.screen_threshold) throw Error("retrospective sampling needs a screen threshold");
    const bool focal = config.design == Design::focal;
    if (focal && config.p < 2) throw Error("the focal setting needs p >= 2");
    const int n = config.n;
    const int p = config.p;
    const double C = *config.screen_threshold;
    const double root_n = std::sqrt(static_cast<double>(n));
    const double sigma = std::sqrt(config.sigma2);

    Dataset data;
    data.labeled_n = n;
    if (focal) {
        data.beta_truth.resize(p);
        data.beta_truth[0] = config.h;
        data.beta_truth.tail(p - 1) = draw_coefficients(config, p - 1);
    } else {
        data.beta_truth = draw_coefficients(config, p);
    }
    // Column c of the design stream carries coefficient coef[c] / sqrt(n).
    std::vector<std::uint32_t> active;
    std::vector<double> active_coef;
    for (int c = 0; c < p; ++c) {
        if (data.beta_truth[c] != 0.0) {
            active.push_back(static_cast<std::uint32_t>(c));
            active_coef.push_back(data.beta_truth[c] / root_n);
        }
    }

    Eigen::MatrixXd design(n, p);
    data.y.resize(n);
    const NormalField field(config.seed, config.replicate, Purpose::design);
    const auto max_raw = static_cast<std::int64_t>(config.max_raw_draws_factor * n);
    std::vector<double> buf;
    std::int64_t raw = 0;
    int accepted = 0;
    while (accepted < n) {
        if (raw >= max_raw) throw Error("retrospective sampling exceeded the raw draw limit");
        const auto row = static_cast<std::uint64_t>(raw++);
        // Only the active columns and the noise decide acceptance; the other
        // entries of the row are independent of Y and are filled on acceptance.
        double yv = sigma * field(row, static_cast<std::uint32_t>(p));
        for (std::size_t k = 0; k < active.size(); ++k) yv += active_coef[k] * field(row, active[k]);
        if (!(std::abs(yv) > C) && C > 0.0) continue;
        fill_design_row(field, row, p, buf);
        for (int c = 0; c < p; ++c) design(accepted, c) = buf[c];
        data.y[accepted] = yv;
        ++accepted;
    }
    data.raw_draws = raw;
    if (focal) {
        data.focal_x = design.col(0);
        data.Z = design.rightCols(p - 1);
    } else {
        data.X = std::move(design);
    }
    return data;
}

Dataset generate_with_unlabeled(const ModelConfig& config) {
    if (config.unlabeled_m < 1) throw Error("generate_with_unlabeled needs unlabeled_m >= 1");
    return generate_setting1(config);
}

Dataset generate(const ModelConfig& config) {
    if (config.screen_threshold) return generate_retrospective(config);
    if (config.design == Design::full) return generate_setting2(config);
    return generate_setting1(config);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    out.precision(17);
    if (data.is_focal()) {
        out << "x";
        for (Eigen::Index j = 0; j < data.Z.cols(); ++j) out << ",z" << (j + 1);
    } else {
        for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << (j ? "," : "") << "x" << (j + 1);
    }
    out << ",y\n";
    for (int i = 0; i < data.total_rows(); ++i) {
        if (data.is_focal()) {
            out << (*data.focal_x)[i];
            for (Eigen::Index j = 0; j < data.Z.cols(); ++j) out << ',' << data.Z(i, j);
        } else {
            for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << (j ? "," : "") << data.X(i, j);
        }
        out << ',';
        if (i < data.labeled_n) out << data.y[i];
        out << '\n';
    }
}

}  // namespace mxpl
