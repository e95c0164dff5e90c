#include "countermachine/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "countermachine/annealer.hpp"
#include "countermachine/format.hpp"

namespace cfm {

double MinMax::scale(double v) const { return std::clamp((v - min) / (max - min), 0.0, 1.0); }

Samples Dataset::samples(const LabelEncoding& encoding) const {
    Samples s{features, Eigen::VectorXd(static_cast<Eigen::Index>(labels.size()))};
    for (std::size_t k = 0; k < labels.size(); ++k) s.t(static_cast<Eigen::Index>(k)) = encoding.value_of(labels[k]);
    return s;
}

namespace {

template <typename Get>
MinMax batch_range(const std::vector<DyadRecord>& records, const char* name, Get get) {
    MinMax mm{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& r : records) {
        mm.min = std::min(mm.min, get(r));
        mm.max = std::max(mm.max, get(r));
    }
    if (!(mm.min < mm.max))
        throw DegenerateFeature(std::string("feature '") + name + "' has no spread (min = max); cannot min-max normalize");
    return mm;
}

}  // namespace

NormalizationParams fit_normalization(const std::vector<DyadRecord>& records) {
    if (records.empty()) throw InvalidArgument("cannot normalize an empty batch");
    return {
        batch_range(records, "distance_km", [](const DyadRecord& r) { return r.distance_km; }),
        batch_range(records, "democracy_score", [](const DyadRecord& r) { return r.democracy_score; }),
        batch_range(records, "econ_interdependence", [](const DyadRecord& r) { return r.econ_interdependence; }),
        batch_range(records, "capability", [](const DyadRecord& r) { return r.capability; }),
    };
}

FeatureVector normalize_record(const DyadRecord& r, const NormalizationParams& p) {
    FeatureVector x(7);
    x(feature::distance) = p.distance.scale(r.distance_km);
    x(feature::contiguity) = r.contiguity ? 1.0 : 0.0;
    x(feature::major_power) = 0.5 * static_cast<double>(r.major_power_count);
    x(feature::allies) = r.allied ? 1.0 : 0.0;
    x(feature::democracy) = p.democracy.scale(r.democracy_score);
    x(feature::econ_interdependence) = p.econ_interdependence.scale(r.econ_interdependence);
    x(feature::capability) = p.capability.scale(r.capability);
    return x;
}

Dataset normalize(const std::vector<DyadRecord>& records) { return normalize(records, fit_normalization(records)); }

Dataset normalize(const std::vector<DyadRecord>& records, const NormalizationParams& params) {
    Dataset ds;
    ds.params = params;
    ds.features.resize(static_cast<Eigen::Index>(records.size()), 7);
    ds.labels.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        ds.features.row(static_cast<Eigen::Index>(k)) = normalize_record(records[k], params).transpose();
        ds.labels.push_back(records[k].label);
    }
    return ds;
}

namespace {

Dataset subset(const Dataset& data, std::vector<std::size_t> rows) {
    std::sort(rows.begin(), rows.end());
    Dataset out;
    out.feature_names = data.feature_names;
    out.params = data.params;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(rows[k]));
        out.labels.push_back(data.labels[rows[k]]);
    }
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_balanced(const Dataset& data, std::size_t train_per_class,
                                           std::size_t test_per_class, std::uint64_t seed) {
    std::vector<std::size_t> war, peace;
    for (std::size_t k = 0; k < data.labels.size(); ++k) (data.labels[k] == Label::War ? war : peace).push_back(k);

    const std::size_t need = train_per_class + test_per_class;
    for (const auto& [name, pool] : {std::pair{"war", &war}, std::pair{"peace", &peace}})
        if (pool->size() < need)
            throw InsufficientClassRows("need " + std::to_string(need) + " " + name + " rows, have " +
                                        std::to_string(pool->size()));

    Rng rng(seed);
    std::shuffle(war.begin(), war.end(), rng);
    std::shuffle(peace.begin(), peace.end(), rng);

    std::vector<std::size_t> train, test;
    for (const auto* pool : {&war, &peace}) {
        train.insert(train.end(), pool->begin(), pool->begin() + static_cast<std::ptrdiff_t>(train_per_class));
        test.insert(test.end(), pool->begin() + static_cast<std::ptrdiff_t>(train_per_class),
                    pool->begin() + static_cast<std::ptrdiff_t>(need));
    }
    return {subset(data, std::move(train)), subset(data, std::move(test))};
}

double ground_truth_score(const FeatureVector& x, const GroundTruth& truth) {
    const auto& w = truth.weights;
    return w[0] * (1.0 - x(feature::distance)) + w[1] * x(feature::contiguity) +
           w[2] * (1.0 - x(feature::democracy)) + w[3] * (1.0 - x(feature::allies)) +
           w[4] * (1.0 - x(feature::econ_interdependence));
}

std::vector<DyadRecord> generate_synthetic(std::size_t n_rows, std::uint64_t seed, const GroundTruth& truth) {
    if (n_rows == 0) throw InvalidArgument("n_rows must be > 0");
    if (!(truth.label_noise >= 0.0 && truth.label_noise <= 1.0)) throw InvalidArgument("label_noise must be in [0, 1]");

    // Raw ranges: capital distance 10..20000 km, polity-style dyadic democracy
    // -10..10, trade share 0..0.3, capability ratio 0..50. Binary features are
    // fair coins; major-power count is 0/1/2 with probabilities 0.6/0.3/0.1.
    Rng rng(seed);
    std::uniform_real_distribution<double> distance(10.0, 20000.0);
    std::uniform_real_distribution<double> democracy(-10.0, 10.0);
    std::uniform_real_distribution<double> econ(0.0, 0.3);
    std::uniform_real_distribution<double> capability(0.0, 50.0);
    std::bernoulli_distribution coin(0.5);
    std::discrete_distribution<int> major_power({0.6, 0.3, 0.1});

    std::vector<DyadRecord> records(n_rows);
    for (auto& r : records) {
        r.distance_km = distance(rng);
        r.contiguity = coin(rng);
        r.major_power_count = major_power(rng);
        r.allied = coin(rng);
        r.democracy_score = democracy(rng);
        r.econ_interdependence = econ(rng);
        r.capability = capability(rng);
    }

    NormalizationParams params{{10.0, 20000.0}, {-10.0, 10.0}, {0.0, 0.3}, {0.0, 50.0}};
    if (n_rows >= 2) params = fit_normalization(records);

    std::bernoulli_distribution flip(truth.label_noise);
    for (auto& r : records) {
        const bool war = ground_truth_score(normalize_record(r, params), truth) > truth.threshold;
        r.label = (war != flip(rng)) ? Label::War : Label::Peace;
    }
    return records;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& cell, std::size_t line, const char* column) {
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto res = std::from_chars(cell.data(), end, v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != end)
        throw ParseError(line, column, "'" + cell + "' is not a number");
    if (!std::isfinite(v)) throw RangeError(line, column, "value must be finite");
    return v;
}

long parse_int(const std::string& cell, std::size_t line, const char* column) {
    long v = 0;
    const auto* end = cell.data() + cell.size();
    const auto res = std::from_chars(cell.data(), end, v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != end)
        throw ParseError(line, column, "'" + cell + "' is not an integer");
    return v;
}

bool parse_flag(const std::string& cell, std::size_t line, const char* column) {
    const long v = parse_int(cell, line, column);
    if (v != 0 && v != 1) throw RangeError(line, column, "expected 0 or 1, got " + cell);
    return v == 1;
}

double parse_nonnegative(const std::string& cell, std::size_t line, const char* column) {
    const double v = parse_real(cell, line, column);
    if (v < 0.0) throw RangeError(line, column, "value must be >= 0, got " + cell);
    return v;
}

}  // namespace

std::vector<DyadRecord> read_csv(std::istream& in) {
    static const std::vector<std::string> header = split_fields(kCsvHeader);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "", "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto got = split_fields(line);
    for (const auto& col : header)
        if (std::find(got.begin(), got.end(), col) == got.end()) throw ParseError(1, col, "missing column");
    if (got != header) throw ParseError(1, "", "header must be exactly '" + std::string(kCsvHeader) + "'");

    std::vector<DyadRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != header.size())
            throw ParseError(lineno, "", "expected " + std::to_string(header.size()) + " fields, got " +
                                             std::to_string(f.size()));
        DyadRecord r;
        r.distance_km = parse_nonnegative(f[0], lineno, "distance_km");
        r.contiguity = parse_flag(f[1], lineno, "contiguity");
        const long mp = parse_int(f[2], lineno, "major_power_count");
        if (mp < 0 || mp > 2) throw RangeError(lineno, "major_power_count", "expected 0, 1 or 2, got " + f[2]);
        r.major_power_count = static_cast<int>(mp);
        r.allied = parse_flag(f[3], lineno, "allied");
        r.democracy_score = parse_real(f[4], lineno, "democracy_score");
        r.econ_interdependence = parse_nonnegative(f[5], lineno, "econ_interdependence");
        r.capability = parse_nonnegative(f[6], lineno, "capability");
        if (f[7] == "war")
            r.label = Label::War;
        else if (f[7] == "peace")
            r.label = Label::Peace;
        else
            throw RangeError(lineno, "label", "expected war or peace, got '" + f[7] + "'");
        records.push_back(r);
    }
    return records;
}

void write_csv(std::ostream& out, const std::vector<DyadRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << format_double(r.distance_km) << ',' << (r.contiguity ? 1 : 0) << ',' << r.major_power_count << ','
            << (r.allied ? 1 : 0) << ',' << format_double(r.democracy_score) << ','
            << format_double(r.econ_interdependence) << ',' << format_double(r.capability) << ','
            << to_string(r.label) << '\n';
    }
}

std::vector<DyadRecord> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open data file '" + path.string() + "'");
    return read_csv(in);
}

void save_csv(const std::filesystem::path& path, const std::vector<DyadRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_csv(out, records);
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace cfm
