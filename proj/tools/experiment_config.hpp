#pragma once

#include "critlab/manifold.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace critlab::cli {

/// Parsed experiment file: flat sectioned key = value text.
///
///   # comment
///   [manifold]
///   kind = sphere            # sphere | torus
///   dim = 6
///   nodes = 4096             # sphere node count / torus nodes per axis
///   clustering = 2.0
///   length = 1.0             # torus side length
///   [fields]
///   h = const(6.0)
///   f = cos_poly(0.5, 0.5)
///   [task]
///   name = classify          # constants | solve | classify | find-critical |
///                            # aubin | concentrate | green-mass | conformal-check
///   ...task parameters...
///   [solver]
///   tau = 0.5
///   max_iter = 20000
///   tol_residual = 1e-8
///   init = multistart        # constant | bubble(mu) | multistart
///   seed = 0
///   [output]
///   dir = out
///   csv = on
///   [sweep]
///   key = task.q
///   values = 2.8, 2.9, 2.95, 2.99
struct ExperimentConfig {
    std::vector<std::string> raw_lines;
    // section -> key -> (value, line number)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> entries;

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_text(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_real(const std::string& section, const std::string& key) const;
    double get_real_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_reals(const std::string& section, const std::string& key) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key) const;

    /// Replace (or insert) one key; used by sweep expansion.
    void set(const std::string& section, const std::string& key, const std::string& value);
};

std::vector<double> parse_real_list(const std::string& text, const std::string& context);

}  // namespace critlab::cli
