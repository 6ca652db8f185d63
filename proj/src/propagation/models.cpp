#include "pmnet/propagation/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pmnet::propagation {

void PropagationConfig::validate() const {
  if (!(fc_ghz >= 0.5 && fc_ghz <= 100.0)) throw std::invalid_argument("PropagationConfig: fc_ghz outside 0.5..100");
  if (!(h_bs > 0.0 && h_ut > 0.0)) throw std::invalid_argument("PropagationConfig: antenna heights must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("PropagationConfig: c must be > 0");
}

void RayLaunchConfig::validate(const PropagationConfig& cfg) const {
  if (n_rays < 8) throw std::invalid_argument("RayLaunchConfig: n_rays must be >= 8");
  if (max_reflections < 0) throw std::invalid_argument("RayLaunchConfig: max_reflections must be >= 0");
  if (floor_dbm > cfg.p_tx_dbm) throw std::invalid_argument("RayLaunchConfig: floor_dbm above transmit power");
  if (!(rx_capture_radius > 0.0)) throw std::invalid_argument("RayLaunchConfig: rx_capture_radius must be > 0");
  if (reflection_loss_db < 0.0 || foliage_loss_db_per_m < 0.0)
    throw std::invalid_argument("RayLaunchConfig: losses must be >= 0");
}

void to_json(nlohmann::json& j, const PropagationConfig& c) {
  j = nlohmann::json{{"fc_ghz", c.fc_ghz}, {"h_bs", c.h_bs}, {"h_ut", c.h_ut}, {"p_tx_dbm", c.p_tx_dbm}, {"c", c.c}};
}

void from_json(const nlohmann::json& j, PropagationConfig& c) {
  c.fc_ghz = j.value("fc_ghz", c.fc_ghz);
  c.h_bs = j.value("h_bs", c.h_bs);
  c.h_ut = j.value("h_ut", c.h_ut);
  c.p_tx_dbm = j.value("p_tx_dbm", c.p_tx_dbm);
  c.c = j.value("c", c.c);
}

void to_json(nlohmann::json& j, const RayLaunchConfig& c) {
  j = nlohmann::json{{"n_rays", c.n_rays},
                     {"max_reflections", c.max_reflections},
                     {"reflection_loss_db", c.reflection_loss_db},
                     {"foliage_loss_db_per_m", c.foliage_loss_db_per_m},
                     {"rx_capture_radius", c.rx_capture_radius},
                     {"floor_dbm", c.floor_dbm}};
}

void from_json(const nlohmann::json& j, RayLaunchConfig& c) {
  c.n_rays = j.value("n_rays", c.n_rays);
  c.max_reflections = j.value("max_reflections", c.max_reflections);
  c.reflection_loss_db = j.value("reflection_loss_db", c.reflection_loss_db);
  c.foliage_loss_db_per_m = j.value("foliage_loss_db_per_m", c.foliage_loss_db_per_m);
  c.rx_capture_radius = j.value("rx_capture_radius", c.rx_capture_radius);
  c.floor_dbm = j.value("floor_dbm", c.floor_dbm);
}

double breakpoint_distance(const PropagationConfig& cfg) {
  return 2.0 * std::numbers::pi * cfg.h_bs * cfg.h_ut * (cfg.fc_ghz * 1e9) / cfg.c;
}

double pl_alpha_beta(double d, const AlphaBetaParams& p) {
  if (!(d > 0.0)) throw std::domain_error("pl_alpha_beta: distance must be > 0");
  return 10.0 * p.alpha * std::log10(d) + p.beta;
}

AlphaBetaParams free_space_params(const PropagationConfig& cfg) {
  return {2.0, 20.0 * std::log10(4.0 * std::numbers::pi / cfg.wavelength_m()), 0.0};
}

std::optional<double> pathloss_umi(const geo::LinkGeometry& geom, const PropagationConfig& cfg) {
  if (geom.d_2d > kUmiMaxDistance) throw std::domain_error("pathloss_umi: d_2d beyond 5 km");
  if (geom.d_2d < kUmiMinDistance) return std::nullopt;

  const double log_fc = std::log10(cfg.fc_ghz);
  const double d_bp = breakpoint_distance(cfg);
  const double dh = cfg.h_bs - cfg.h_ut;

  const double pl_los = geom.d_2d <= d_bp
                            ? 32.4 + 21.0 * std::log10(geom.d_3d) + 20.0 * log_fc
                            : 32.4 + 40.0 * std::log10(geom.d_3d) + 20.0 * log_fc -
                                  9.5 * std::log10(d_bp * d_bp + dh * dh);
  if (geom.los) return pl_los;
  const double pl3 = 22.4 + 35.3 * std::log10(geom.d_3d) + 21.3 * log_fc - 0.6 * (cfg.h_ut - 1.5);
  return std::max(pl_los, pl3);
}

PathlossGrid pathloss_map_3gpp(const geo::BuildingMap& map, const geo::TxLocation& tx, const PropagationConfig& cfg) {
  cfg.validate();
  if (!map.in_bounds(tx.pos) || !map.is_free(tx.pos)) throw std::invalid_argument("pathloss_map_3gpp: TX not on a FREE cell");
  PathlossGrid grid = make_grid_for(map, tx);
  const geo::TxLocation site{tx.pos, cfg.h_bs};
  constexpr double kNearFieldDbm = 0.0;  // gray 255
  for (int y = 0; y < map.size(); ++y) {
    for (int x = 0; x < map.size(); ++x) {
      if (!grid.roi(x, y)) continue;
      const auto geom = geo::link_geometry(map, site, {x, y}, cfg.h_ut);
      double p_rx = kFloorDbm;
      if (geom.d_2d <= kUmiMaxDistance) {
        const auto pl = pathloss_umi(geom, cfg);
        p_rx = pl ? cfg.p_tx_dbm - *pl : kNearFieldDbm;
      }
      grid.at(x, y) = static_cast<float>(std::max(p_rx, kFloorDbm));
    }
  }
  return grid;
}

namespace {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

enum class LegEnd { Exit, ReflectX, ReflectY, ReflectBoth };

struct Leg {
  double length = 0.0;
  LegEnd end = LegEnd::Exit;
  int end_cell_x = 0;
  int end_cell_y = 0;
  // foliage intervals [t0, t1) along the leg, in increasing order
  std::vector<std::pair<double, double>> foliage;

  double foliage_before(double t) const {
    double acc = 0.0;
    for (const auto& [a, b] : foliage) {
      if (a >= t) break;
      acc += std::min(b, t) - a;
    }
    return acc;
  }
};

// Amanatides-Woo traversal from `start` (inside cell cx, cy) along `dir`
// until the ray leaves the map or would enter a BUILDING cell.
Leg trace_leg(const geo::BuildingMap& map, Vec2 start, Vec2 dir, int cx, int cy) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int step_x = dir.x > 0 ? 1 : -1;
  const int step_y = dir.y > 0 ? 1 : -1;
  const double delta_x = dir.x != 0.0 ? 1.0 / std::abs(dir.x) : kInf;
  const double delta_y = dir.y != 0.0 ? 1.0 / std::abs(dir.y) : kInf;
  double t_max_x = dir.x > 0 ? (cx + 1 - start.x) / dir.x : dir.x < 0 ? (start.x - cx) / -dir.x : kInf;
  double t_max_y = dir.y > 0 ? (cy + 1 - start.y) / dir.y : dir.y < 0 ? (start.y - cy) / -dir.y : kInf;
  t_max_x = std::max(t_max_x, 0.0);
  t_max_y = std::max(t_max_y, 0.0);

  Leg leg;
  double t = 0.0;
  auto blocked = [&](int x, int y) { return map.is_building({x, y}); };
  auto inside = [&](int x, int y) { return map.in_bounds({x, y}); };
  for (;;) {
    const double t_next = std::min(t_max_x, t_max_y);
    if (map.at(cx, cy) == geo::Cell::Foliage) {
      if (!leg.foliage.empty() && leg.foliage.back().second == t)
        leg.foliage.back().second = t_next;
      else
        leg.foliage.emplace_back(t, t_next);
    }
    leg.length = t_next;
    leg.end_cell_x = cx;
    leg.end_cell_y = cy;
    if (std::abs(t_max_x - t_max_y) < 1e-12) {
      const int nx = cx + step_x;
      const int ny = cy + step_y;
      if (!inside(nx, ny)) return leg;
      const bool a = blocked(nx, cy);
      const bool b = blocked(cx, ny);
      const bool c = blocked(nx, ny);
      if (!a && !b && !c) {
        cx = nx;
        cy = ny;
        t = t_next;
        t_max_x += delta_x;
        t_max_y += delta_y;
        continue;
      }
      leg.end = (a && b) || (!a && !b) ? LegEnd::ReflectBoth : a ? LegEnd::ReflectX : LegEnd::ReflectY;
      return leg;
    }
    if (t_max_x < t_max_y) {
      const int nx = cx + step_x;
      if (!inside(nx, cy)) return leg;
      if (blocked(nx, cy)) {
        leg.end = LegEnd::ReflectX;
        return leg;
      }
      cx = nx;
      t = t_next;
      t_max_x += delta_x;
    } else {
      const int ny = cy + step_y;
      if (!inside(cx, ny)) return leg;
      if (blocked(cx, ny)) {
        leg.end = LegEnd::ReflectY;
        return leg;
      }
      cy = ny;
      t = t_next;
      t_max_y += delta_y;
    }
  }
}

}  // namespace

PathlossGrid ray_launch(const geo::BuildingMap& map, const geo::TxLocation& tx, const PropagationConfig& cfg,
                        const RayLaunchConfig& rl, RayLaunchStats* stats) {
  cfg.validate();
  rl.validate(cfg);
  if (!map.in_bounds(tx.pos) || !map.is_free(tx.pos)) throw std::invalid_argument("ray_launch: TX not on a FREE cell");

  PathlossGrid grid = make_grid_for(map, tx);
  const int n = map.size();
  std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);

  const double mpp = map.meters_per_pixel();
  const double lambda = cfg.wavelength_m();
  const double d_min = lambda / (4.0 * std::numbers::pi);  // keeps P_rx <= P_tx
  const double p_tx_mw = std::pow(10.0, cfg.p_tx_dbm / 10.0);
  auto free_space_mw = [&](double d_m) {
    const double d = std::max(d_m, d_min);
    const double g = lambda / (4.0 * std::numbers::pi * d);
    return p_tx_mw * g * g;
  };

  const double spacing = 2.0 * std::numbers::pi / rl.n_rays;
  const Vec2 origin{tx.pos.x + 0.5, tx.pos.y + 0.5};
  long long segments = 0;

  for (int k = 0; k < rl.n_rays; ++k) {
    const double theta = (k + 0.5) * spacing;
    Vec2 dir{std::cos(theta), std::sin(theta)};
    Vec2 start = origin;
    int cx = tx.pos.x;
    int cy = tx.pos.y;
    double unfolded = 0.0;      // path length before this leg, pixels
    double loss_db = 0.0;       // reflection losses so far
    double foliage_px = 0.0;    // foliage path length before this leg, pixels

    for (int bounce = 0;; ++bounce) {
      const Leg leg = trace_leg(map, start, dir, cx, cy);
      const Vec2 source = start - dir * unfolded;  // image source of this leg

      const int steps = static_cast<int>(std::ceil(leg.length));
      for (int j = 0; j < steps; ++j) {
        const double t_lo = j;
        const double t_hi = std::min<double>(j + 1, leg.length);
        const double reach = std::max(rl.rx_capture_radius, (unfolded + t_hi) * spacing) + 1.0;
        const Vec2 a = start + dir * t_lo;
        const Vec2 b = start + dir * t_hi;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
        const int x1 = std::min(n - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
        const int y1 = std::min(n - 1, static_cast<int>(std::floor(std::max(a.y, b.y) + reach)));
        for (int py = y0; py <= y1; ++py) {
          for (int px = x0; px <= x1; ++px) {
            if (!grid.roi(px, py)) continue;
            const Vec2 q{px + 0.5, py + 0.5};
            const double t_foot = dot(q - start, dir);
            if (t_foot < t_lo || t_foot >= t_hi) continue;
            const Vec2 w = q - source;
            const double range = std::hypot(w.x, w.y);
            if (range < 1e-9) continue;
            const double off_axis = std::atan2(std::abs(w.x * dir.y - w.y * dir.x), dot(w, dir));
            const double half_width = std::max(spacing, rl.rx_capture_radius / range);
            if (off_axis >= half_width) continue;
            const double share = (1.0 - off_axis / half_width) * (spacing / half_width);
            const double foliage_m = (foliage_px + leg.foliage_before(t_foot)) * mpp;
            const double atten_db = loss_db + foliage_m * rl.foliage_loss_db_per_m;
            acc[grid.index(px, py)] += share * free_space_mw(range * mpp) * std::pow(10.0, -atten_db / 10.0);
          }
        }
      }
      ++segments;

      if (leg.end == LegEnd::Exit || bounce >= rl.max_reflections) break;
      start = start + dir * leg.length;
      if (leg.end == LegEnd::ReflectX || leg.end == LegEnd::ReflectBoth) dir.x = -dir.x;
      if (leg.end == LegEnd::ReflectY || leg.end == LegEnd::ReflectBoth) dir.y = -dir.y;
      cx = leg.end_cell_x;
      cy = leg.end_cell_y;
      unfolded += leg.length;
      loss_db += rl.reflection_loss_db;
      foliage_px += leg.foliage_before(leg.length);
    }
  }

  // The transmitter cell itself sees the direct path at half a pixel.
  acc[grid.index(tx.pos.x, tx.pos.y)] = free_space_mw(0.5 * mpp);

  double total = 0.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto i = grid.index(x, y);
      if (!grid.roi_mask[i]) continue;
      total += acc[i];
      const double dbm = acc[i] > 0.0 ? 10.0 * std::log10(acc[i]) : rl.floor_dbm;
      grid.values[i] = static_cast<float>(std::clamp(dbm, rl.floor_dbm, cfg.p_tx_dbm));
    }
  }
  if (stats) {
    stats->total_collected_mw = total;
    stats->launched_mw = p_tx_mw;
    stats->ray_segments = segments;
  }
  return grid;
}

}  // namespace pmnet::propagation
