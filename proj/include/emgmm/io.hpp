#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "emgmm/bounds.hpp"
#include "emgmm/errors.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/model.hpp"
#include "emgmm/sampling.hpp"

namespace emgmm {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Deterministic, locale-free number formatting and parsing.
// ---------------------------------------------------------------------------

/// Shortest decimal form of x that parses back to exactly the same double
/// (std::to_chars round-trip guarantee). Locale-independent.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc())
        throw DomainError("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

/// Strict double parser: the entire token must be consumed.
inline double parse_double(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ParseError("parse_double: invalid number '" + token + "'");
    return v;
}

/// Strict integer parser: the entire token must be consumed.
inline long long parse_int(const std::string& token) {
    long long v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ParseError("parse_int: invalid integer '" + token + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Structured-text (JSON) model / estimate serialization.
// Schema: {"d": int, "k": int, "weights": [K numbers], "means": [K*d numbers]}
// with means flattened row-major; estimates omit "weights" (they are known
// model parameters, not part of an estimate).
// ---------------------------------------------------------------------------

inline json model_to_json(const MixtureModel& model) {
    json j;
    j["d"] = model.d;
    j["k"] = model.k;
    j["weights"] = model.weights;
    j["means"] = model.means.a;
    return j;
}

namespace detail {

inline Mat means_from_flat(const json& j, int k, int d, const char* who) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(d))
        throw ParseError(std::string(who) + ": 'means' must be a flat array of k*d numbers");
    Mat m(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < m.a.size(); ++i) {
        if (!j[i].is_number())
            throw ParseError(std::string(who) + ": 'means' contains a non-number");
        m.a[i] = j[i].get<double>();
    }
    return m;
}

inline void require_fields(const json& j, std::initializer_list<const char*> keys,
                           const char* who) {
    if (!j.is_object()) throw ParseError(std::string(who) + ": top level must be an object");
    for (const char* key : keys)
        if (!j.contains(key))
            throw ParseError(std::string(who) + ": missing field '" + key + "'");
}

}  // namespace detail

inline MixtureModel model_from_json(const json& j) {
    detail::require_fields(j, {"d", "k", "weights", "means"}, "model_from_json");
    const int d = j["d"].get<int>();
    const int k = j["k"].get<int>();
    if (d < 1 || k < 1) throw ParseError("model_from_json: d and k must be positive");
    if (!j["weights"].is_array() || j["weights"].size() != static_cast<std::size_t>(k))
        throw ParseError("model_from_json: 'weights' must be an array of k numbers");
    const Vec weights = j["weights"].get<Vec>();
    const Mat means = detail::means_from_flat(j["means"], k, d, "model_from_json");
    return build_model(means, weights);
}

inline json estimate_to_json(const MeansEstimate& estimate) {
    json j;
    j["d"] = static_cast<int>(estimate.means.cols);
    j["k"] = static_cast<int>(estimate.means.rows);
    j["means"] = estimate.means.a;
    return j;
}

inline MeansEstimate estimate_from_json(const json& j) {
    detail::require_fields(j, {"d", "k", "means"}, "estimate_from_json");
    const int d = j["d"].get<int>();
    const int k = j["k"].get<int>();
    if (d < 1 || k < 1) throw ParseError("estimate_from_json: d and k must be positive");
    MeansEstimate est;
    est.means = detail::means_from_flat(j["means"], k, d, "estimate_from_json");
    return est;
}

// ---------------------------------------------------------------------------
// File helpers.
// ---------------------------------------------------------------------------

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_json: cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("save_json: write failed on '" + path + "'");
}

inline json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_json: cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("load_json: '" + path + "': " + e.what());
    }
}

inline void save_model(const std::string& path, const MixtureModel& model) {
    save_json(path, model_to_json(model));
}

inline MixtureModel load_model(const std::string& path) {
    try {
        return model_from_json(load_json(path));
    } catch (const json::exception& e) {
        throw ParseError("load_model: '" + path + "': " + e.what());
    }
}

inline void save_estimate(const std::string& path, const MeansEstimate& estimate) {
    save_json(path, estimate_to_json(estimate));
}

inline MeansEstimate load_estimate(const std::string& path) {
    try {
        return estimate_from_json(load_json(path));
    } catch (const json::exception& e) {
        throw ParseError("load_estimate: '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Flat sample-data format.
//
// Line 1 (header):  d  K  w_1 ... w_K
// Lines 2..n+1:     x_1 ... x_d [label]
//
// Whitespace-separated decimal numbers; the optional trailing integer label
// records the generative component and is ignored by fitting. Label presence
// must be consistent across rows.
// ---------------------------------------------------------------------------

struct SampleFile {
    int d = 0;
    int k = 0;
    Vec weights;
    SampleBlock samples;
    bool has_labels = false;
};

inline void save_samples(const std::string& path, const MixtureModel& model,
                         const SampleBlock& block, bool with_labels = true) {
    if (block.d != model.d)
        throw ShapeMismatch("save_samples: sample dimension does not match the model");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_samples: cannot open '" + path + "' for writing");
    out << model.d << ' ' << model.k;
    for (double w : model.weights) out << ' ' << format_double(w);
    out << '\n';
    const std::size_t n = block.size();
    for (std::size_t l = 0; l < n; ++l) {
        const double* x = block.point(l);
        for (int c = 0; c < block.d; ++c) {
            if (c > 0) out << ' ';
            out << format_double(x[c]);
        }
        if (with_labels) out << ' ' << block.labels[l];
        out << '\n';
    }
    if (!out) throw IoError("save_samples: write failed on '" + path + "'");
}

inline SampleFile load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_samples: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("load_samples: empty file '" + path + "'");

    const auto tokenize = [](const std::string& s) {
        std::vector<std::string> tokens;
        std::istringstream iss(s);
        std::string tok;
        while (iss >> tok) tokens.push_back(tok);
        return tokens;
    };

    SampleFile file;
    {
        const auto head = tokenize(line);
        if (head.size() < 3)
            throw ParseError("load_samples: header must read 'd K w_1 ... w_K'");
        file.d = static_cast<int>(parse_int(head[0]));
        file.k = static_cast<int>(parse_int(head[1]));
        if (file.d < 1 || file.k < 1)
            throw ParseError("load_samples: header d and K must be positive");
        if (head.size() != 2 + static_cast<std::size_t>(file.k))
            throw ParseError("load_samples: header lists " +
                             std::to_string(head.size() - 2) + " weights, expected " +
                             std::to_string(file.k));
        for (std::size_t i = 2; i < head.size(); ++i)
            file.weights.push_back(parse_double(head[i]));
    }

    file.samples.d = file.d;
    const std::size_t d = static_cast<std::size_t>(file.d);
    bool first_row = true;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        ++row_index;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;  // blank lines permitted
        const bool labeled = tokens.size() == d + 1;
        if (!labeled && tokens.size() != d)
            throw ParseError("load_samples: row " + std::to_string(row_index) + " has " +
                             std::to_string(tokens.size()) + " columns, expected " +
                             std::to_string(d) + " or " + std::to_string(d + 1));
        if (first_row) {
            file.has_labels = labeled;
            first_row = false;
        } else if (labeled != file.has_labels) {
            throw ParseError("load_samples: row " + std::to_string(row_index) +
                             " is inconsistent about the trailing label column");
        }
        for (std::size_t c = 0; c < d; ++c)
            file.samples.points.push_back(parse_double(tokens[c]));
        file.samples.labels.push_back(
            labeled ? static_cast<int>(parse_int(tokens[d])) : -1);
    }
    if (file.samples.labels.empty())
        throw ParseError("load_samples: no sample rows in '" + path + "'");
    return file;
}

// ---------------------------------------------------------------------------
// CSV output. Cells are preformatted tokens; the writer rejects anything that
// would need quoting, because every schema in this library emits only numbers
// and [A-Za-z0-9_.+-] identifiers. Line endings are '\n' regardless of
// platform, so identical runs produce byte-identical files.
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline void write_csv_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string& cell = cells[i];
        if (cell.find_first_of(",\"\n\r") != std::string::npos)
            throw DomainError("write_csv: cell '" + cell + "' would require quoting");
        if (i > 0) os << ',';
        os << cell;
    }
    os << '\n';
}

}  // namespace detail

inline void write_csv(std::ostream& os, const CsvTable& table) {
    detail::write_csv_line(os, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw ShapeMismatch("write_csv: row width " + std::to_string(row.size()) +
                                " does not match header width " +
                                std::to_string(table.header.size()));
        detail::write_csv_line(os, row);
    }
}

inline void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_csv_file: cannot open '" + path + "' for writing");
    write_csv(out, table);
    if (!out) throw IoError("write_csv_file: write failed on '" + path + "'");
}

// ---------------------------------------------------------------------------
// BoundReport serialization: a nested JSON document and a flat one-row CSV.
// CSV layout (fixed): scalar fields in declaration order, then per-component
// vectors exploded as name_i, then K x K matrices exploded as name_i_j
// (indices 1-based, row-major). Booleans are true/false in JSON, 1/0 in CSV.
// ---------------------------------------------------------------------------

namespace detail {

inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline json report_to_json(const BoundReport& rep) {
    json j;
    j["k"] = rep.k;
    j["d"] = rep.d;
    j["d0"] = rep.d0;
    j["lambda"] = rep.lambda;
    j["n"] = rep.n;
    j["delta"] = rep.delta;
    j["step_size"] = rep.step_size;
    j["r_min"] = rep.r_min;
    j["r_max"] = rep.r_max;
    j["theta"] = rep.theta;
    j["c_lambda"] = rep.c_lambda;
    j["min_separation"] = rep.min_separation;
    j["separation_ok"] = rep.separation_ok;
    j["sample_ratio_em"] = rep.sample_ratio_em;
    j["sample_ratio_grad"] = rep.sample_ratio_grad;
    j["minimal_n_em"] = rep.minimal_n_em;
    j["minimal_n_grad"] = rep.minimal_n_grad;
    j["sample_size_ok_em"] = rep.sample_size_ok_em;
    j["sample_size_ok_grad"] = rep.sample_size_ok_grad;
    j["gamma"] = rep.gamma;
    j["denominator_separation"] = rep.denominator_separation;
    j["tilde_c_em"] = rep.tilde_c_em;
    j["tilde_c_grad"] = rep.tilde_c_grad;
    j["statistical_error_em"] = rep.statistical_error_em;
    j["statistical_error_grad"] = rep.statistical_error_grad;
    j["self_responsibility"] = rep.self_responsibility;
    j["subgauss_truth"] = rep.subgauss_truth;
    j["subgauss_estimate"] = rep.subgauss_estimate;
    j["cross_responsibility"] = detail::mat_to_json(rep.cross_responsibility);
    j["cross_covariance"] = detail::mat_to_json(rep.cross_covariance);
    return j;
}

inline CsvTable report_to_csv(const BoundReport& rep) {
    CsvTable t;
    std::vector<std::string> row;
    const auto scalar = [&](const char* name, const std::string& value) {
        t.header.push_back(name);
        row.push_back(value);
    };
    const auto vec = [&](const char* name, const Vec& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            t.header.push_back(std::string(name) + "_" + std::to_string(i + 1));
            row.push_back(format_double(v[i]));
        }
    };
    const auto mat = [&](const char* name, const Mat& m) {
        for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < m.cols; ++c) {
                t.header.push_back(std::string(name) + "_" + std::to_string(r + 1) + "_" +
                                   std::to_string(c + 1));
                row.push_back(format_double(m(r, c)));
            }
        }
    };

    scalar("k", std::to_string(rep.k));
    scalar("d", std::to_string(rep.d));
    scalar("d0", format_double(rep.d0));
    scalar("lambda", format_double(rep.lambda));
    scalar("n", std::to_string(rep.n));
    scalar("delta", format_double(rep.delta));
    scalar("step_size", format_double(rep.step_size));
    scalar("r_min", format_double(rep.r_min));
    scalar("r_max", format_double(rep.r_max));
    scalar("theta", format_double(rep.theta));
    scalar("c_lambda", format_double(rep.c_lambda));
    scalar("min_separation", format_double(rep.min_separation));
    scalar("separation_ok", rep.separation_ok ? "1" : "0");
    scalar("sample_ratio_em", format_double(rep.sample_ratio_em));
    scalar("sample_ratio_grad", format_double(rep.sample_ratio_grad));
    scalar("minimal_n_em", std::to_string(rep.minimal_n_em));
    scalar("minimal_n_grad", std::to_string(rep.minimal_n_grad));
    scalar("sample_size_ok_em", rep.sample_size_ok_em ? "1" : "0");
    scalar("sample_size_ok_grad", rep.sample_size_ok_grad ? "1" : "0");
    scalar("gamma", format_double(rep.gamma));
    scalar("denominator_separation", format_double(rep.denominator_separation));
    scalar("tilde_c_em", format_double(rep.tilde_c_em));
    scalar("tilde_c_grad", format_double(rep.tilde_c_grad));
    vec("statistical_error_em", rep.statistical_error_em);
    vec("statistical_error_grad", rep.statistical_error_grad);
    vec("self_responsibility", rep.self_responsibility);
    vec("subgauss_truth", rep.subgauss_truth);
    vec("subgauss_estimate", rep.subgauss_estimate);
    mat("cross_responsibility", rep.cross_responsibility);
    mat("cross_covariance", rep.cross_covariance);
    t.rows.push_back(std::move(row));
    return t;
}

}  // namespace emgmm
