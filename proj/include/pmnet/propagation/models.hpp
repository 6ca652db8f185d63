#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "pmnet/geo/building_map.hpp"
#include "pmnet/propagation/pathloss_grid.hpp"

namespace pmnet::propagation {

struct PropagationConfig {
  double fc_ghz = 3.0;
  double h_bs = geo::kDefaultBsHeight;
  double h_ut = geo::kDefaultUtHeight;
  double p_tx_dbm = 0.0;
  double c = 3.0e8;

  double wavelength_m() const { return c / (fc_ghz * 1e9); }
  /// Throws std::invalid_argument outside 0.5..100 GHz or for non-positive heights.
  void validate() const;
};

struct AlphaBetaParams {
  double alpha = 2.0;
  double beta = 0.0;
  double sigma_s = 0.0;  ///< shadowing std, carried but not sampled
};

struct RayLaunchConfig {
  int n_rays = 720;
  int max_reflections = 3;
  double reflection_loss_db = 6.0;
  double foliage_loss_db_per_m = 0.5;
  double rx_capture_radius = 0.5;  ///< pixels
  double floor_dbm = kFloorDbm;

  void validate(const PropagationConfig& cfg) const;
};

void to_json(nlohmann::json& j, const PropagationConfig& c);
void from_json(const nlohmann::json& j, PropagationConfig& c);
void to_json(nlohmann::json& j, const RayLaunchConfig& c);
void from_json(const nlohmann::json& j, RayLaunchConfig& c);

/// 2*pi*h_bs*h_ut*f_c/c with f_c in Hz.
double breakpoint_distance(const PropagationConfig& cfg);

/// 10*alpha*log10(d) + beta. The shadowing term is not sampled.
/// Throws std::domain_error for d <= 0.
double pl_alpha_beta(double d, const AlphaBetaParams& p);

/// Free-space parameters (alpha = 2, beta = FSPL at 1 m) for the carrier.
AlphaBetaParams free_space_params(const PropagationConfig& cfg);

/// Distance below which the UMi model is not applied.
inline constexpr double kUmiMinDistance = 10.0;
inline constexpr double kUmiMaxDistance = 5000.0;

/// 3GPP UMi street-canyon pathloss in dB (f_c in GHz inside the formulas).
///
/// LoS: PL1 up to the breakpoint, PL2 beyond. NLoS: max(LoS, PL3).
/// Returns std::nullopt in the near field (d_2d < 10 m); such pixels are
/// assigned 0 dBm by the map generator. Throws std::domain_error for
/// d_2d > 5 km.
std::optional<double> pathloss_umi(const geo::LinkGeometry& geom, const PropagationConfig& cfg);

/// UMi pathloss over every RoI pixel of the map with map-derived LoS.
PathlossGrid pathloss_map_3gpp(const geo::BuildingMap& map, const geo::TxLocation& tx, const PropagationConfig& cfg);

/// Diagnostics from a ray-launch run.
struct RayLaunchStats {
  double total_collected_mw = 0.0;  ///< sum of linear power over all pixels
  double launched_mw = 0.0;         ///< transmit power shared by all rays
  long long ray_segments = 0;
};

/// 2D ray launcher with specular wall reflections.
///
/// Rays leave the transmitter cell center at uniform angles. Power along a
/// ray follows free space 1/d^2 in the unfolded path length, minus the
/// per-bounce reflection loss and the foliage loss per meter traversed.
/// Each pixel sums the linear power of every ray path that passes it; a
/// ray's share is a tent in angle around the pixel as seen from the ray's
/// (image) source, of half-width max(ray spacing, capture radius / range),
/// so the direct-path sum reproduces free space regardless of n_rays.
PathlossGrid ray_launch(const geo::BuildingMap& map, const geo::TxLocation& tx, const PropagationConfig& cfg,
                        const RayLaunchConfig& rl, RayLaunchStats* stats = nullptr);

}  // namespace pmnet::propagation
