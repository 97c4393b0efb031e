#include "pluridyn/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pluridyn {

namespace {

std::uint32_t crc32_of(const unsigned char* data, std::size_t n,
                       std::uint32_t seed = 0) {
    return static_cast<std::uint32_t>(
        ::crc32(seed, reinterpret_cast<const Bytef*>(data),
                static_cast<uInt>(n)));
}

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

void png_chunk(std::ostream& out, const char type[4], const std::string& data) {
    std::string buf;
    put_u32(buf, static_cast<std::uint32_t>(data.size()));
    buf.append(type, 4);
    buf.append(data);
    std::uint32_t crc = crc32_of(
        reinterpret_cast<const unsigned char*>(buf.data() + 4), buf.size() - 4);
    put_u32(buf, crc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

} // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb) {
    if (static_cast<std::size_t>(width) * height * 3 != rgb.size())
        throw ParseError("png buffer size mismatch");
    // filter type 0 per scanline
    std::string raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + width * 3));
    for (int y = 0; y < height; ++y) {
        raw.push_back('\0');
        raw.append(reinterpret_cast<const char*>(&rgb[static_cast<std::size_t>(y) *
                                                      width * 3]),
                   static_cast<std::size_t>(width) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw ParseError("zlib compression failed");
    compressed.resize(bound);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                         '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);
    std::string ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // no interlace
    png_chunk(out, "IHDR", ihdr);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", "");
}

namespace {

// compact heat colormap: black -> blue -> red -> yellow -> white
void heat_color(double t, unsigned char* rgb) {
    t = std::max(0.0, std::min(1.0, t));
    const double r = std::min(1.0, std::max(0.0, 3.0 * t - 0.6));
    const double g = std::min(1.0, std::max(0.0, 3.0 * t - 1.6));
    const double b =
        t < 0.35 ? 3.0 * t : std::max(0.0, 1.1 - 2.2 * t);
    rgb[0] = static_cast<unsigned char>(255.0 * r + 0.5);
    rgb[1] = static_cast<unsigned char>(255.0 * g + 0.5);
    rgb[2] = static_cast<unsigned char>(255.0 * b + 0.5);
}

} // namespace

void render_cloud_png(const std::string& png_path, const std::string& csv_path,
                      const std::vector<std::pair<V3, double>>& cloud,
                      const ChartRaster& raster) {
    const int W = raster.size, H = raster.size;
    std::vector<double> acc(static_cast<std::size_t>(W) * H, 0.0);
    std::ofstream csv(csv_path);
    if (!csv) throw ParseError("cannot write " + csv_path);
    csv << "x,y,weight\n";
    for (const auto& [p, w] : cloud) {
        const cplx den = p(raster.den_index);
        if (std::abs(den) < 1e-12) continue;
        const cplx z = p(raster.num_index) / den;
        const double x = z.real(), y = z.imag();
        csv << fmt17(x) << ',' << fmt17(y) << ',' << fmt17(w) << "\n";
        if (std::abs(x) >= raster.range || std::abs(y) >= raster.range) continue;
        const int px = static_cast<int>((x + raster.range) /
                                        (2 * raster.range) * W);
        const int py = static_cast<int>((y + raster.range) /
                                        (2 * raster.range) * H);
        if (px >= 0 && px < W && py >= 0 && py < H)
            acc[static_cast<std::size_t>(py) * W + px] += w;
    }
    double peak = 0.0;
    for (double v : acc) peak = std::max(peak, v);
    std::vector<unsigned char> rgb(static_cast<std::size_t>(W) * H * 3, 0);
    if (peak > 0.0) {
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const double t =
                acc[i] > 0.0 ? std::log1p(acc[i] / peak * 255.0) / std::log(256.0)
                             : 0.0;
            heat_color(t, &rgb[i * 3]);
        }
    }
    write_png_rgb(png_path, W, H, rgb);
}

std::string file_contents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t file_hash(const std::string& path) {
    return fnv1a(file_contents(path));
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace pluridyn
