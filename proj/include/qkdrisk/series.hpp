#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkdrisk {

// One QBER measurement epoch. attack_label carries simulation ground truth
// and is never produced by real-device ingestion.
struct QberSample {
    std::int64_t timestamp = 0;  // seconds since epoch
    double qber = 0.0;           // fraction in [0, 1]
    std::optional<double> visibility;  // fraction in [0, 1]
    std::optional<double> key_rate;    // bits/second
    std::optional<bool> attack_label;

    // Device yields no key when visibility drops below 0.9 or QBER exceeds
    // the 11% abort ceiling. Such epochs stay in the series, flagged.
    bool zero_key_epoch() const {
        return qber > 0.11 || (visibility && *visibility < 0.9);
    }
};

struct QberSeries {
    std::vector<QberSample> samples;
    std::string channel_tag;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    std::vector<double> qber_values() const;
    bool has_labels() const;
    std::size_t labeled_count() const;

    // Checks bounds and timestamp ordering; throws DataError on violation.
    void validate() const;
};

enum class FoldMode { Contiguous, Strided };

// Disjoint index sets covering [0, n), sizes differing by at most one.
struct FoldSet {
    std::vector<std::vector<std::size_t>> folds;

    std::size_t k() const { return folds.size(); }
};

FoldSet partition_folds(std::size_t n, std::size_t k, FoldMode mode = FoldMode::Contiguous);
FoldSet partition_folds(const QberSeries& series, std::size_t k, FoldMode mode = FoldMode::Contiguous);

// QBER values of one fold, in index order.
std::vector<double> fold_values(const QberSeries& series, const FoldSet& folds, std::size_t i);

// Column-name mapping for CSV ingestion. Only the qber column is mandatory.
struct CsvSchema {
    std::string timestamp = "timestamp";
    std::string qber = "qber";
    std::string visibility = "visibility";
    std::string key_rate = "key_rate";
    std::string attack_label = "attack_label";
};

// Loads a QBER log. Rows whose qber falls outside [0, 1] or fails to parse
// abort the load with a DataError listing the offending line numbers.
// The result is sorted by timestamp (stable).
QberSeries load_qber_csv(const std::string& path, const CsvSchema& schema = {});

// Writes `timestamp,qber,visibility,key_rate[,attack_label]`, UTF-8, LF.
// Floating-point fields use shortest round-trip decimal text, so a reload
// reproduces every value bit-exactly.
void save_qber_csv(const QberSeries& series, const std::string& path);

// The same CSV content as a string (canonical form used for content hashing).
std::string to_csv_string(const QberSeries& series);

}  // namespace qkdrisk
