#include "fractv/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fractv/errors.hpp"

namespace fractv {

namespace {

class Scanner {
public:
    explicit Scanner(std::string_view s) : s_(s) {}

    std::size_t pos() const { return pos_; }
    /// Where the most recent number began.
    std::size_t last_start() const { return last_start_; }
    bool done() const { return pos_ >= s_.size(); }

    void skip_space_and_comments() {
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        last_start_ = start;
        if (done()) throw ParseError(std::string("pgm: missing ") + what, pos_);
        unsigned long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(s_[pos_] - '0');
            if (v > 0xFFFFFFFFul) throw ParseError(std::string("pgm: ") + what + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("pgm: expected ") + what, start);
        if (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '#') {
            throw ParseError(std::string("pgm: malformed ") + what, pos_);
        }
        return v;
    }

    unsigned char byte() { return static_cast<unsigned char>(s_[pos_++]); }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t last_start_ = 0;
};

}  // namespace

Image parse_pgm(std::string_view bytes, double spacing) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw ParseError("pgm: expected magic P2 or P5", 0);
    }
    const bool binary = bytes[1] == '5';
    Scanner sc(bytes.substr(0));
    sc.byte();
    sc.byte();
    if (!sc.done() && !std::isspace(static_cast<unsigned char>(bytes[2])) && bytes[2] != '#') {
        throw ParseError("pgm: malformed magic", 2);
    }
    const unsigned long width = sc.number("width");
    const std::size_t wpos = sc.last_start();
    const unsigned long height = sc.number("height");
    const std::size_t hpos = sc.last_start();
    const unsigned long maxval = sc.number("maxval");
    const std::size_t mpos = sc.last_start();
    if (width == 0 || width > 65536) throw ParseError("pgm: width must be in 1..65536", wpos);
    if (height == 0 || height > 65536) throw ParseError("pgm: height must be in 1..65536", hpos);
    if (maxval == 0 || maxval > 65535) throw ParseError("pgm: maxval must be in 1..65535", mpos);

    const std::size_t n = width * height;
    std::vector<double> samples(n);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
        // exactly one whitespace byte separates the header from the raster
        if (sc.done() || !std::isspace(static_cast<unsigned char>(bytes[sc.pos()]))) {
            throw ParseError("pgm: missing whitespace after maxval", sc.pos());
        }
        sc.byte();
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        const std::size_t start = sc.pos();
        if (bytes.size() - start < n * bpp) {
            throw ParseError("pgm: truncated raster", bytes.size());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = start + i * bpp;
            unsigned long v = static_cast<unsigned char>(bytes[at]);
            if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[at + 1]);
            if (v > maxval) throw ParseError("pgm: sample exceeds maxval", at);
            samples[i] = static_cast<double>(v) * scale;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            sc.skip_space_and_comments();
            if (sc.done()) throw ParseError("pgm: truncated raster", sc.pos());
            const unsigned long v = sc.number("sample");
            const std::size_t at = sc.last_start();
            if (v > maxval) throw ParseError("pgm: sample exceeds maxval", at);
            samples[i] = static_cast<double>(v) * scale;
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), spacing, std::move(samples));
}

Image read_pgm(const std::string& path, double spacing) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("pgm: cannot open '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(bytes, spacing);
}

std::string encode_pgm(const Image& image, int maxval, PgmEncoding encoding) {
    if (maxval < 1 || maxval > 65535) throw std::invalid_argument("pgm: maxval must be in 1..65535");
    std::ostringstream os;
    const bool binary = encoding == PgmEncoding::binary;
    os << (binary ? "P5" : "P2") << '\n' << image.width() << ' ' << image.height() << '\n'
       << maxval << '\n';
    std::string out = os.str();
    const double m = static_cast<double>(maxval);
    auto quantize = [m](double x) {
        // nearbyint under the default rounding mode rounds half to even
        return static_cast<unsigned>(std::nearbyint(std::clamp(x, 0.0, 1.0) * m));
    };
    const auto& s = image.storage();
    if (binary) {
        for (double x : s) {
            const unsigned q = quantize(x);
            if (maxval > 255) out.push_back(static_cast<char>(q >> 8));
            out.push_back(static_cast<char>(q & 0xFF));
        }
    } else {
        for (int i = 0; i < image.height(); ++i) {
            for (int j = 0; j < image.width(); ++j) {
                if (j) out.push_back(' ');
                out += std::to_string(quantize(image.at(i, j)));
            }
            out.push_back('\n');
        }
    }
    return out;
}

void write_pgm(const std::string& path, const Image& image, int maxval, PgmEncoding encoding) {
    const std::string bytes = encode_pgm(image, maxval, encoding);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("pgm: cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("pgm: write failed for '" + path + "'");
}

}  // namespace fractv
