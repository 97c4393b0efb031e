#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pluridyn/green.hpp"
#include "pluridyn/projective.hpp"

namespace pluridyn {

// minimal PNG writer (8-bit RGB, zlib-deflated), deterministic bytes
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb);

// Raster of a weighted point cloud in the affine chart z_num / z_den,
// heat-colormapped by accumulated weight; writes the PNG and its CSV twin
// (x, y, weight rows: exactly the numbers that were rasterized).
struct ChartRaster {
    int num_index = 1;
    int den_index = 0;
    double range = 2.0; // chart window [-range, range]^2
    int size = 512;
};

void render_cloud_png(const std::string& png_path, const std::string& csv_path,
                      const std::vector<std::pair<V3, double>>& cloud,
                      const ChartRaster& raster);

std::string file_contents(const std::string& path);
std::uint64_t file_hash(const std::string& path);

// fixed-format float for CSV cells (round-trip exact)
std::string fmt17(double v);

} // namespace pluridyn
