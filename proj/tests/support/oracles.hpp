#pragma once

// Independent reference implementations used by unit and acceptance tests.
// They are written from the definitions, share no code with the library and
// favour obviousness over speed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pmnet::testing {

using Grid = std::vector<std::vector<double>>;  // [y][x]

double rmse_oracle(const Grid& pred, const Grid& gt);
/// Building iff value < 0.5 / 255; errors in both directions over the gt
/// building count. NaN when gt has no building pixel but some error.
double roi_error_oracle(const Grid& pred, const Grid& gt);
/// RMSE in dB (value * 255 - 255) over pixels that are RoI in both maps,
/// or in gt only when gt_only is set. NaN when no pixel qualifies.
double channel_error_oracle(const Grid& pred, const Grid& gt, bool gt_only = false);

/// Direct dilated cross-correlation. f[c][y][x], w[o][c][m][n].
using Volume = std::vector<std::vector<std::vector<double>>>;
std::vector<Volume> direct_conv_oracle(const Volume& f, const std::vector<Volume>& w, int r, int stride, int padding);

/// 3GPP UMi written out term by term (distances in m, fc in GHz).
double umi_pl1(double d3d, double fc_ghz);
double umi_pl2(double d3d, double fc_ghz, double dbp, double h_bs, double h_ut);
double umi_pl3(double d3d, double fc_ghz, double h_ut);

/// Dense sampling of the segment between cell centres at 0.01 px steps,
/// reporting every cell the sample points fall in (ties at corners count
/// for all touching cells).
std::vector<std::pair<int, int>> dense_cells(int x0, int y0, int x1, int y1);

/// Removes the directory on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "pmnet");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace pmnet::testing
