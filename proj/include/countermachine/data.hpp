#pragma once

// Dyadic conflict records: schema, normalization to [0,1]^7, balanced
// splitting, CSV I/O and a synthetic generator.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "countermachine/fuzzy.hpp"
#include "countermachine/training.hpp"

namespace cfm {

/// Canonical feature order.
inline const std::vector<std::string> kFeatureNames = {
    "distance", "contiguity", "major_power", "allies", "democracy", "econ_interdependence", "capability",
};

namespace feature {
inline constexpr Eigen::Index distance = 0;
inline constexpr Eigen::Index contiguity = 1;
inline constexpr Eigen::Index major_power = 2;
inline constexpr Eigen::Index allies = 3;
inline constexpr Eigen::Index democracy = 4;
inline constexpr Eigen::Index econ_interdependence = 5;
inline constexpr Eigen::Index capability = 6;
}  // namespace feature

struct DyadRecord {
    double distance_km = 0.0;
    bool contiguity = false;
    int major_power_count = 0;
    bool allied = false;
    double democracy_score = 0.0;
    double econ_interdependence = 0.0;
    double capability = 0.0;
    Label label = Label::Peace;

    bool operator==(const DyadRecord&) const = default;
};

struct MinMax {
    double min = 0.0;
    double max = 1.0;

    /// Maps [min, max] onto [0, 1], clamping values outside the range.
    double scale(double v) const;
    bool operator==(const MinMax&) const = default;
};

struct NormalizationParams {
    MinMax distance;
    MinMax democracy;
    MinMax econ_interdependence;
    MinMax capability;

    bool operator==(const NormalizationParams&) const = default;
};

struct Dataset {
    std::vector<std::string> feature_names = kFeatureNames;
    /// One row per dyad, columns in kFeatureNames order.
    Eigen::MatrixXd features;
    std::vector<Label> labels;
    NormalizationParams params;

    std::size_t size() const { return labels.size(); }
    /// Targets encoded with `encoding` (War = 1, Peace = 0 by default).
    Samples samples(const LabelEncoding& encoding = {}) const;
};

/// Fits min-max parameters to the batch. Throws DegenerateFeature if any min-max feature is constant.
NormalizationParams fit_normalization(const std::vector<DyadRecord>& records);

FeatureVector normalize_record(const DyadRecord& record, const NormalizationParams& params);

Dataset normalize(const std::vector<DyadRecord>& records);
Dataset normalize(const std::vector<DyadRecord>& records, const NormalizationParams& params);

/// Balanced train/test split, drawn uniformly without replacement per class.
std::pair<Dataset, Dataset> split_balanced(const Dataset& data, std::size_t train_per_class,
                                           std::size_t test_per_class, std::uint64_t seed);

struct GroundTruth {
    /// Weights on (1 - distance), contiguity, (1 - democracy), (1 - allies), (1 - econ).
    std::array<double, 5> weights = {0.30, 0.25, 0.20, 0.15, 0.10};
    double threshold = 0.5;
    double label_noise = 0.05;
};

/// Peace-promoting linear score on normalized features; War above the threshold.
double ground_truth_score(const FeatureVector& x, const GroundTruth& truth = {});

std::vector<DyadRecord> generate_synthetic(std::size_t n_rows, std::uint64_t seed, const GroundTruth& truth = {});

inline constexpr const char* kCsvHeader =
    "distance_km,contiguity,major_power_count,allied,democracy_score,econ_interdependence,capability,label";

std::vector<DyadRecord> read_csv(std::istream& in);
void write_csv(std::ostream& out, const std::vector<DyadRecord>& records);
std::vector<DyadRecord> load_csv(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const std::vector<DyadRecord>& records);

}  // namespace cfm
