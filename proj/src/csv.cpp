#include "fractv/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fractv {

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string records_csv(const std::vector<AssessmentRecord>& records) {
    const std::size_t layers = records.empty() ? 2 : records.front().params.alpha.size();
    std::string out;
    for (std::size_t j = 0; j < layers; ++j) out += "alpha" + std::to_string(j) + ",";
    out += "r1,r2,";
    for (std::size_t j = 0; j < layers; ++j) out += "p" + std::to_string(j) + ",";
    out += "assessment,converged,iterations\n";
    for (const auto& r : records) {
        if (r.params.alpha.size() != layers || r.params.p.size() != layers) {
            throw std::invalid_argument("records_csv: records with different layer counts");
        }
        for (double a : r.params.alpha) out += format_number(a) + ",";
        out += format_number(r.params.r1) + "," + format_number(r.params.r2) + ",";
        for (const auto& p : r.params.p) out += p.to_string() + ",";
        out += format_number(r.assessment) + "," + (r.report.converged ? "1" : "0") + "," +
               std::to_string(r.report.iterations) + "\n";
    }
    return out;
}

std::string matrix_csv(const Image& image) {
    std::string out;
    for (int i = 0; i < image.height(); ++i) {
        for (int j = 0; j < image.width(); ++j) {
            if (j) out.push_back(',');
            out += format_number(image.at(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace fractv
