#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgx {

struct UnknownClassifier : std::runtime_error {
    explicit UnknownClassifier(const std::string& name)
        : std::runtime_error("unknown classifier '" + name + "'") {}
};

struct DetectorEntry {
    std::string name;
    double cost = 0.0;  // seconds added to every perception loop while active
};

/// Catalogue of available object classifiers with per-frame costs, plus the
/// sensing geometry they share.
struct Registry {
    double base_cost = 0.10;  // fixed per-loop cost of running the pipeline at all
    double range = 4.5;       // detection range in metres
    std::vector<DetectorEntry> detectors;

    bool has(const std::string& name) const {
        for (const auto& d : detectors)
            if (d.name == name) return true;
        return false;
    }

    double cost_of(const std::string& name) const {
        for (const auto& d : detectors)
            if (d.name == name) return d.cost;
        throw UnknownClassifier(name);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& d : detectors) out.push_back(d.name);
        return out;
    }

    double total_cost() const {
        double s = 0.0;
        for (const auto& d : detectors) s += d.cost;
        return s;
    }

    static Registry load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open registry file: " + path);
        Registry r;
        r.detectors.clear();
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;
            if (key == "base") {
                ls >> r.base_cost;
            } else if (key == "range") {
                ls >> r.range;
            } else if (key == "detector") {
                DetectorEntry d;
                if (!(ls >> d.name >> d.cost))
                    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                             ": detector needs a name and a cost");
                r.detectors.push_back(d);
            } else {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": unknown directive '" + key + "'");
            }
        }
        return r;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write registry file: " + path);
        out << "base " << base_cost << "\n";
        out << "range " << range << "\n";
        for (const auto& d : detectors) out << "detector " << d.name << " " << d.cost << "\n";
    }

    /// Profiled costs for the desk-scale classifier bank at indoor range.
    static Registry builtin_indoor() {
        Registry r;
        r.base_cost = 0.10;
        r.range = 4.5;
        r.detectors = {
            {"ball", 0.28},   {"box", 0.32},      {"crackers_box", 0.30}, {"drill", 0.26},
            {"hammer", 0.25}, {"mug", 0.24},      {"bottle", 0.27},       {"can", 0.22},
            {"banana", 0.21}, {"apple", 0.23},    {"scissors", 0.25},     {"cup", 0.24},
            {"plate", 0.26},  {"bowl", 0.23},     {"marker", 0.20},       {"book", 0.281},
        };
        return r;
    }

    /// Same bank with the longer-range outdoor sensing profile.
    static Registry builtin_outdoor() {
        Registry r = builtin_indoor();
        r.range = 7.0;
        return r;
    }
};

}  // namespace lgx
