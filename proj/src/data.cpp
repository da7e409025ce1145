#include <certbayes/data.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace certbayes {

void SyntheticSpec::validate() const
{
    detail::require(n >= 1, ErrorCode::InvalidArgument, "synthetic n must be >= 1, got " + std::to_string(n));
    detail::require(d >= 1, ErrorCode::InvalidArgument, "synthetic d must be >= 1, got " + std::to_string(d));
    detail::require_positive(sigma_x_sq, "sigma_x_sq");
    detail::require_positive(sigma_sq, "sigma_sq");
    detail::require_nonnegative(theta_star_norm_sq, "theta_star_norm_sq");
}

namespace {

Eigen::VectorXd draw_theta_star(std::mt19937_64& rng, const SyntheticSpec& spec)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(spec.d);
    for (Eigen::Index j = 0; j < spec.d; ++j) z[j] = normal(rng);
    if (spec.theta_star_norm_sq == 0) return Eigen::VectorXd::Zero(spec.d);
    return z.normalized() * std::sqrt(spec.theta_star_norm_sq);
}

Dataset<double> draw_rows(std::mt19937_64& rng, const SyntheticSpec& spec, const Eigen::VectorXd& theta,
                          Eigen::Index rows)
{
    std::normal_distribution<double> feature(0.0, std::sqrt(spec.sigma_x_sq));
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.sigma_sq));
    Eigen::MatrixXd x(rows, spec.d);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < spec.d; ++j) x(i, j) = feature(rng);
    Eigen::VectorXd y = x * theta;
    for (Eigen::Index i = 0; i < rows; ++i) y[i] += noise(rng);
    return {std::move(x), std::move(y)};
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                             : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(const std::string& s)
{
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    if (v.empty()) return std::nullopt;
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) return std::nullopt;
    return out;
}

std::string location(const std::string& path, std::size_t line, std::size_t col, const std::string& name)
{
    return path + ": line " + std::to_string(line) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    Eigen::VectorXd theta = draw_theta_star(rng, spec);
    Dataset<double> data = draw_rows(rng, spec, theta, spec.n);
    return {std::move(data), std::move(theta)};
}

SyntheticSplit generate_synthetic_split(const SyntheticSpec& spec, Eigen::Index n_test)
{
    spec.validate();
    detail::require(n_test >= 1, ErrorCode::InvalidArgument, "test size must be >= 1");
    std::mt19937_64 rng(spec.seed);
    Eigen::VectorXd theta = draw_theta_star(rng, spec);
    Dataset<double> train = draw_rows(rng, spec, theta, spec.n);
    Dataset<double> test = draw_rows(rng, spec, theta, n_test);
    return {std::move(train), std::move(test), std::move(theta)};
}

CsvTable load_csv_table(const std::string& path, const TargetColumn& target)
{
    std::ifstream in(path);
    detail::require(bool(in), ErrorCode::Io, "cannot open '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_line(line);
            break;
        }
    }
    detail::require(!header.empty(), ErrorCode::ParseError, path + ": missing header row");
    const std::size_t cols = header.size();

    std::size_t target_col = cols;
    if (const auto* name = std::get_if<std::string>(&target)) {
        const auto it = std::find(header.begin(), header.end(), *name);
        detail::require(it != header.end(), ErrorCode::MissingTarget,
                        path + ": no column named '" + *name + "'");
        target_col = std::size_t(it - header.begin());
    } else {
        target_col = std::get<std::size_t>(target);
        detail::require(target_col < cols, ErrorCode::MissingTarget,
                        path + ": target index " + std::to_string(target_col) + " out of range for "
                            + std::to_string(cols) + " columns");
    }

    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto row = split_line(line);
        detail::require(row.size() == cols, ErrorCode::ParseError,
                        path + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size())
                            + " fields, header has " + std::to_string(cols));
        cells.push_back(std::move(row));
        lines.push_back(line_no);
    }
    detail::require(!cells.empty(), ErrorCode::Empty, path + ": no data rows");
    const std::size_t rows = cells.size();

    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            detail::require(!cells[r][c].empty(), ErrorCode::ParseError,
                            "empty cell at " + location(path, lines[r], c, header[c]));

    // A column is numeric when at least one of its cells parses.
    std::vector<std::vector<std::optional<double>>> parsed(cols, std::vector<std::optional<double>>(rows));
    std::vector<bool> numeric(cols, false);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r) {
            parsed[c][r] = parse_number(cells[r][c]);
            numeric[c] = numeric[c] || parsed[c][r].has_value();
        }
    detail::require(numeric[target_col], ErrorCode::NonNumericColumn,
                    path + ": target column '" + header[target_col] + "' is not numeric");

    CsvTable out;
    out.target_name = header[target_col];
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < cols; ++c) {
        if (!numeric[c]) {
            out.skipped_columns.push_back(header[c]);
            continue;
        }
        for (std::size_t r = 0; r < rows; ++r)
            detail::require(parsed[c][r].has_value(), ErrorCode::ParseError,
                            "cannot parse '" + cells[r][c] + "' as a number at "
                                + location(path, lines[r], c, header[c]));
        if (c != target_col) {
            feature_cols.push_back(c);
            out.feature_names.push_back(header[c]);
        }
    }
    detail::require(!feature_cols.empty(), ErrorCode::Empty, path + ": no numeric feature columns");

    Eigen::MatrixXd x(rows, feature_cols.size());
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) x(r, j) = *parsed[feature_cols[j]][r];
        y[r] = *parsed[target_col][r];
    }
    out.data = validate_dataset(x, y);
    return out;
}

void write_csv(const std::string& path, const Dataset<double>& data, std::vector<std::string> feature_names,
               const std::string& target_name)
{
    detail::require(data.X.allFinite() && data.Y.allFinite(), ErrorCode::NonFiniteEntry,
                    "refusing to write non-finite values to '" + path + "'");
    if (feature_names.empty())
        for (Eigen::Index j = 0; j < data.d(); ++j) feature_names.push_back("x" + std::to_string(j + 1));
    detail::require(Eigen::Index(feature_names.size()) == data.d(), ErrorCode::DimensionMismatch,
                    "feature name count does not match d");

    std::ofstream out(path);
    detail::require(bool(out), ErrorCode::Io, "cannot write '" + path + "'");
    for (const auto& name : feature_names) out << name << ',';
    out << target_name << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.d(); ++j) out << format_double(data.X(i, j)) << ',';
        out << format_double(data.Y[i]) << '\n';
    }
    detail::require(bool(out), ErrorCode::Io, "write to '" + path + "' failed");
}

Standardized standardize_fit_transform(const Dataset<double>& train, const Dataset<double>& test)
{
    detail::require(train.n() >= 2, ErrorCode::TooFewRows,
                    "standardization needs at least 2 training rows, got " + std::to_string(train.n()));
    detail::require_same_dim(train.d(), test.d(), "train vs test feature count");
    const double n = double(train.n());

    StandardizationStats st;
    st.feature_mean = train.X.colwise().mean().transpose();
    st.feature_sd = ((train.X.rowwise() - st.feature_mean.transpose()).array().square().colwise().sum() / n)
                        .sqrt()
                        .transpose();
    st.label_mean = train.Y.mean();
    st.label_sd = std::sqrt((train.Y.array() - st.label_mean).square().sum() / n);

    auto degenerate = [](double sd, double mean) { return !(sd > 1e-12 * std::max(1.0, std::abs(mean))); };
    for (Eigen::Index j = 0; j < train.d(); ++j)
        detail::require(!degenerate(st.feature_sd[j], st.feature_mean[j]), ErrorCode::ZeroVarianceColumn,
                        "feature column " + std::to_string(j) + " has zero variance in the training set");
    detail::require(!degenerate(st.label_sd, st.label_mean), ErrorCode::ZeroVarianceColumn,
                    "label column has zero variance in the training set");

    auto apply = [&](const Dataset<double>& ds) {
        Eigen::MatrixXd x = (ds.X.rowwise() - st.feature_mean.transpose()).array().rowwise()
                            / st.feature_sd.transpose().array();
        Eigen::VectorXd y = (ds.Y.array() - st.label_mean) / st.label_sd;
        return Dataset<double>{std::move(x), std::move(y)};
    };
    return {apply(train), apply(test), st};
}

std::pair<Dataset<double>, Dataset<double>> split(const Dataset<double>& data, const SplitSpec& spec)
{
    detail::require(spec.train_fraction > 0 && spec.train_fraction < 1, ErrorCode::InvalidArgument,
                    "train fraction must lie in (0, 1)");
    detail::require(data.n() >= 2, ErrorCode::TooFewRows, "split needs at least 2 rows");
    const Eigen::Index n_train = Eigen::Index(std::floor(double(data.n()) * spec.train_fraction));
    detail::require(n_train >= 1 && n_train < data.n(), ErrorCode::TooFewRows,
                    "split of " + std::to_string(data.n()) + " rows leaves one side empty");

    std::vector<Eigen::Index> perm(data.n());
    std::iota(perm.begin(), perm.end(), Eigen::Index(0));
    std::mt19937_64 rng(spec.seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    auto take = [&](Eigen::Index from, Eigen::Index count) {
        Dataset<double> out{Eigen::MatrixXd(count, data.d()), Eigen::VectorXd(count)};
        for (Eigen::Index i = 0; i < count; ++i) {
            out.X.row(i) = data.X.row(perm[from + i]);
            out.Y[i] = data.Y[perm[from + i]];
        }
        return out;
    };
    return {take(0, n_train), take(n_train, data.n() - n_train)};
}

} // namespace certbayes
