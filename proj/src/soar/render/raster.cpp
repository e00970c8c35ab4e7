#include "soar/render/raster.hpp"

#include <algorithm>
#include <cmath>

namespace soar {

void PosedSurfels::validate() const {
  const Eigen::Index n = size();
  SOAR_REQUIRE(static_cast<Eigen::Index>(rotations.size()) == n &&
                   static_cast<Eigen::Index>(scales.size()) == n &&
                   static_cast<Eigen::Index>(colors.size()) == n &&
                   occlusion.size() == n,
               "posed surfel arrays must have identical length");
  for (Eigen::Index i = 0; i < n; ++i)
    SOAR_REQUIRE(scales[i] > 0, str_cat("surfel ", i, " has non-positive scale"));
}

void RenderRequest::validate() const {
  SOAR_REQUIRE(!back_normal || order == DepthOrder::descending,
               "back-normal rendering requires descending depth order");
  SOAR_REQUIRE(!occlusion || cull_backfaces,
               "occlusion rendering requires back-face culling");
}

bool Rasterizer::intersect(const SurfelPre& pre, const Vec3& ray, Hit* hit) const {
  const Vec3 n = pre.r_cam.col(2);
  const double denom = n.dot(ray);
  if (std::abs(denom) < 1e-8) return false;  // edge-on
  const double tstar = n.dot(pre.mu_cam) / denom;
  if (tstar <= kNearClip) return false;
  const Vec3 delta = tstar * ray - pre.mu_cam;
  const double u = pre.r_cam.col(0).dot(delta);
  const double v = pre.r_cam.col(1).dot(delta);
  const double g = std::exp(-(u * u + v * v) / (2.0 * pre.s_eff * pre.s_eff));
  if (g < kGaussianCutoff) return false;
  hit->alpha = std::min(kAlphaMax, g);
  hit->alpha_clamped = g >= kAlphaMax;
  hit->g = g;
  hit->u = u;
  hit->v = v;
  hit->tstar = tstar;
  hit->denom = denom;
  return true;
}

RenderOutput Rasterizer::forward(const PosedSurfels& surfels, const Camera& camera,
                                 const RenderRequest& request) {
  surfels.validate();
  camera.validate();
  request.validate();

  surfels_ = surfels;
  cam_ = camera;
  req_ = request;
  const Eigen::Index n = surfels.size();
  const int w = camera.width, h = camera.height;
  f_mean_ = (camera.intrinsics(0, 0) + camera.intrinsics(1, 1)) / 2.0;

  const Mat3 r_e = camera.extrinsics.leftCols<3>();
  pre_.assign(n, SurfelPre{});
  std::vector<char> active(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    SurfelPre& p = pre_[i];
    p.mu_cam = camera.to_camera(surfels.positions[i]);
    p.r_cam = r_e * surfels.rotations[i];
    const double z = p.mu_cam.z();
    if (z <= kNearClip) continue;
    if (request.cull_backfaces && p.r_cam.col(2).dot(p.mu_cam) >= 0) continue;
    const double floor_s = z / f_mean_;  // 1-pixel projected footprint
    p.s_clamped = surfels.scales[i] < floor_s;
    p.s_eff = p.s_clamped ? floor_s : surfels.scales[i];
    active[i] = 1;
  }

  order_.clear();
  if (!request.order_override.empty()) {
    std::vector<char> seen(n, 0);
    for (int i : request.order_override) {
      SOAR_REQUIRE(i >= 0 && i < n, "order override index out of range");
      SOAR_REQUIRE(!seen[i], "order override repeats a surfel");
      seen[i] = 1;
      if (active[i]) order_.push_back(i);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      if (active[i]) order_.push_back(static_cast<int>(i));
    const bool asc = request.order == DepthOrder::ascending;
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      const double za = pre_[a].mu_cam.z(), zb = pre_[b].mu_cam.z();
      if (za != zb) return asc ? za < zb : za > zb;
      return a < b;
    });
  }

  // Conservative tile binning. A splat's support is the 3D disk of radius r3
  // around mu (the tangent-frame cutoff |u| <= r3), so its projection lies
  // inside the projection of the ball B(mu, r3): for a point p = mu + r3*u,
  // |fx*(p_x/p_z - mu_x/mu_z)| <= fx * r3 * ||mu|| / (z * (z - r3)).
  tiles_x_ = (w + tile_ - 1) / tile_;
  tiles_y_ = (h + tile_ - 1) / tile_;
  bins_.assign(static_cast<size_t>(tiles_x_) * tiles_y_, {});
  const double cutoff_r = std::sqrt(2.0 * std::log(255.0));
  const double fx = camera.intrinsics(0, 0), fy = camera.intrinsics(1, 1);
  const double skew = camera.intrinsics(0, 1);
  for (int k = 0; k < static_cast<int>(order_.size()); ++k) {
    const SurfelPre& p = pre_[order_[k]];
    const double z = p.mu_cam.z();
    const double r3 = cutoff_r * p.s_eff;
    int x0 = 0, x1 = w - 1, y0 = 0, y1 = h - 1;
    if (z - r3 > kNearClip) {
      const Vec2 c = camera.project_camera(p.mu_cam);
      const double geom = r3 * p.mu_cam.norm() / (z * (z - r3));
      const double bx = (std::abs(fx) + std::abs(skew)) * geom + 2.0;
      const double by = std::abs(fy) * geom + 2.0;
      x0 = std::max(0, static_cast<int>(std::ceil(c.x() - bx - 0.5)));
      x1 = std::min(w - 1, static_cast<int>(std::floor(c.x() + bx - 0.5)));
      y0 = std::max(0, static_cast<int>(std::ceil(c.y() - by - 0.5)));
      y1 = std::min(h - 1, static_cast<int>(std::floor(c.y() + by - 0.5)));
      if (x0 > x1 || y0 > y1) continue;
    }
    for (int ty = y0 / tile_; ty <= y1 / tile_; ++ty)
      for (int tx = x0 / tile_; tx <= x1 / tile_; ++tx)
        bins_[static_cast<size_t>(ty) * tiles_x_ + tx].push_back(k);
  }

  RenderOutput out;
  if (request.rgb) out.rgb = Image(w, h, 3);
  if (request.mask) out.mask = Image(w, h, 1);
  if (request.depth) out.depth = Image(w, h, 1);
  if (request.normal) out.normal = Image(w, h, 3);
  if (request.back_normal) out.back_normal = Image(w, h, 3);
  if (request.occlusion) out.occlusion = Image(w, h, 1);
  out.alpha = Image(w, h, 1);

  parallel_for(static_cast<std::int64_t>(bins_.size()), [&](std::int64_t tb,
                                                            std::int64_t te) {
    for (std::int64_t t = tb; t < te; ++t) {
      const int tx = static_cast<int>(t % tiles_x_), ty = static_cast<int>(t / tiles_x_);
      const int px1 = std::min(w, (tx + 1) * tile_), py1 = std::min(h, (ty + 1) * tile_);
      for (int py = ty * tile_; py < py1; ++py) {
        for (int px = tx * tile_; px < px1; ++px) {
          const Vec3 ray = cam_.pixel_ray(px, py);
          double transmit = 1.0;
          Vec3 rgb = Vec3::Zero(), nrm = Vec3::Zero(), bnrm = Vec3::Zero();
          double msk = 0, dep = 0, occ = 0;
          for (int k : bins_[t]) {
            const int i = order_[k];
            Hit hit;
            if (!intersect(pre_[i], ray, &hit)) continue;
            const double wgt = transmit * hit.alpha;
            if (req_.rgb) rgb += wgt * surfels_.colors[i];
            if (req_.mask) msk += wgt;
            if (req_.depth) dep += wgt * hit.tstar;
            if (req_.normal) nrm += wgt * pre_[i].r_cam.col(2);
            if (req_.back_normal) bnrm -= wgt * pre_[i].r_cam.col(2);
            if (req_.occlusion) occ += wgt * surfels_.occlusion[i];
            transmit *= 1.0 - hit.alpha;
            if (transmit < kTransmittanceFloor) break;
          }
          const double a = 1.0 - transmit;
          out.alpha.at(px, py, 0) = a;
          if (req_.rgb) out.rgb.set_pixel3(px, py, rgb + transmit * req_.rgb_background);
          if (req_.mask) out.mask.at(px, py, 0) = msk;
          if (req_.depth)
            out.depth.at(px, py, 0) = dep + transmit * req_.depth_background;
          if (req_.normal) {
            if (a > 0.5 && nrm.norm() > 1e-12) nrm.normalize();
            out.normal.set_pixel3(px, py, nrm);
          }
          if (req_.back_normal) {
            if (a > 0.5 && bnrm.norm() > 1e-12) bnrm.normalize();
            out.back_normal.set_pixel3(px, py, bnrm);
          }
          if (req_.occlusion) out.occlusion.at(px, py, 0) = occ;
        }
      }
    }
  });
  have_forward_ = true;
  return out;
}

namespace {

struct GradAccum {
  std::vector<Vec3> dmu_cam;
  std::vector<Mat3> dr_cam;
  VecX ds, dtau;
  std::vector<Vec3> dc;

  explicit GradAccum(Eigen::Index n)
      : dmu_cam(n, Vec3::Zero()),
        dr_cam(n, Mat3::Zero()),
        ds(VecX::Zero(n)),
        dtau(VecX::Zero(n)),
        dc(n, Vec3::Zero()) {}
};

Vec3 normalize_vjp(const Vec3& raw, const Vec3& dunit) {
  const double len = raw.norm();
  const Vec3 unit = raw / len;
  return (dunit - unit * unit.dot(dunit)) / len;
}

}  // namespace

RenderGradients Rasterizer::backward(const RenderOutput& grads) const {
  SOAR_REQUIRE(have_forward_, "render backward without a forward pass");
  const int w = cam_.width, h = cam_.height;
  const Eigen::Index n = surfels_.size();

  const auto use = [&](const Image& img, bool rendered, int ch, const char* name) {
    if (img.empty()) return false;
    SOAR_REQUIRE(rendered,
                 str_cat("gradient supplied for channel '", name,
                         "' that was not rendered"));
    SOAR_REQUIRE(img.height() == h && img.width() == w && img.channels() == ch,
                 str_cat("gradient image shape mismatch for channel '", name, "'"));
    return true;
  };
  const bool grgb = use(grads.rgb, req_.rgb, 3, "rgb");
  const bool gmask = use(grads.mask, req_.mask, 1, "mask");
  const bool gdepth = use(grads.depth, req_.depth, 1, "depth");
  const bool gnormal = use(grads.normal, req_.normal, 3, "normal");
  const bool gback = use(grads.back_normal, req_.back_normal, 3, "back_normal");
  const bool gocc = use(grads.occlusion, req_.occlusion, 1, "occlusion");
  SOAR_REQUIRE(grads.alpha.empty(),
               "alpha has no independent gradient: use the mask channel");

  struct Rec {
    int i;
    Hit hit;
    double transmit;  // before this hit
  };

  const std::int64_t ntiles = static_cast<std::int64_t>(bins_.size());
  const std::int64_t chunk_size =
      std::max<std::int64_t>(1, (ntiles + thread_count() - 1) / thread_count());
  const int nchunks =
      static_cast<int>(std::max<std::int64_t>(1, (ntiles + chunk_size - 1) / chunk_size));
  std::vector<GradAccum> accums(nchunks, GradAccum(n));

  parallel_for(ntiles, [&](std::int64_t tb, std::int64_t te) {
    GradAccum& acc = accums[static_cast<size_t>(tb / chunk_size)];
    std::vector<Rec> recs;
    for (std::int64_t t = tb; t < te; ++t) {
      const int tx = static_cast<int>(t % tiles_x_), ty = static_cast<int>(t / tiles_x_);
      const int px1 = std::min(w, (tx + 1) * tile_), py1 = std::min(h, (ty + 1) * tile_);
      for (int py = ty * tile_; py < py1; ++py) {
        for (int px = tx * tile_; px < px1; ++px) {
          const Vec3 ray = cam_.pixel_ray(px, py);

          recs.clear();
          double transmit = 1.0;
          Vec3 raw_nrm = Vec3::Zero(), raw_bnrm = Vec3::Zero();
          for (int k : bins_[t]) {
            const int i = order_[k];
            Hit hit;
            if (!intersect(pre_[i], ray, &hit)) continue;
            recs.push_back({i, hit, transmit});
            const double wgt = transmit * hit.alpha;
            if (gnormal) raw_nrm += wgt * pre_[i].r_cam.col(2);
            if (gback) raw_bnrm -= wgt * pre_[i].r_cam.col(2);
            transmit *= 1.0 - hit.alpha;
            if (transmit < kTransmittanceFloor) break;
          }
          if (recs.empty()) continue;
          const double t_final = transmit;
          const double a = 1.0 - t_final;

          Vec3 drgb = Vec3::Zero(), dnrm = Vec3::Zero(), dbnrm = Vec3::Zero();
          double dmask = 0, ddep = 0, docc = 0;
          if (grgb) drgb = grads.rgb.pixel3(px, py);
          if (gmask) dmask = grads.mask.at(px, py, 0);
          if (gdepth) ddep = grads.depth.at(px, py, 0);
          if (gocc) docc = grads.occlusion.at(px, py, 0);
          if (gnormal) {
            dnrm = grads.normal.pixel3(px, py);
            if (a > 0.5 && raw_nrm.norm() > 1e-12) dnrm = normalize_vjp(raw_nrm, dnrm);
          }
          if (gback) {
            dbnrm = grads.back_normal.pixel3(px, py);
            if (a > 0.5 && raw_bnrm.norm() > 1e-12)
              dbnrm = normalize_vjp(raw_bnrm, dbnrm);
          }

          // Suffix accumulators seeded with the background contribution so
          // d/dalpha_i picks up the -suffix/(1-alpha_i) term of everything
          // composited after hit i.
          Vec3 suf_rgb = t_final * req_.rgb_background;
          double suf_mask = 0, suf_dep = t_final * req_.depth_background, suf_occ = 0;
          Vec3 suf_nrm = Vec3::Zero(), suf_bnrm = Vec3::Zero();

          for (int r = static_cast<int>(recs.size()) - 1; r >= 0; --r) {
            const Rec& rec = recs[r];
            const int i = rec.i;
            const Hit& hit = rec.hit;
            const SurfelPre& p = pre_[i];
            const double ti = rec.transmit;
            const double wgt = ti * hit.alpha;
            const double om = 1.0 - hit.alpha;
            const Vec3 nvec = p.r_cam.col(2);

            double dalpha = 0;
            if (grgb) {
              dalpha += drgb.dot(ti * surfels_.colors[i] - suf_rgb / om);
              acc.dc[i] += wgt * drgb;
              suf_rgb += wgt * surfels_.colors[i];
            }
            if (gmask) {
              dalpha += dmask * (ti - suf_mask / om);
              suf_mask += wgt;
            }
            if (gdepth) {
              dalpha += ddep * (ti * hit.tstar - suf_dep / om);
              suf_dep += wgt * hit.tstar;
            }
            if (gnormal) {
              dalpha += dnrm.dot(ti * nvec - suf_nrm / om);
              suf_nrm += wgt * nvec;
            }
            if (gback) {
              dalpha += dbnrm.dot(-ti * nvec - suf_bnrm / om);
              suf_bnrm -= wgt * nvec;
            }
            if (gocc) {
              dalpha += docc * (ti * surfels_.occlusion[i] - suf_occ / om);
              acc.dtau[i] += wgt * docc;
              suf_occ += wgt * surfels_.occlusion[i];
            }

            const double dt_payload = gdepth ? ddep * wgt : 0.0;
            Vec3 dn_payload = Vec3::Zero();
            if (gnormal) dn_payload += wgt * dnrm;
            if (gback) dn_payload -= wgt * dbnrm;

            const double dG = hit.alpha_clamped ? 0.0 : dalpha;
            const double s2 = p.s_eff * p.s_eff;
            const double grho = -hit.g * dG;  // G = exp(-rho)
            const double gu = grho * hit.u / s2;
            const double gv = grho * hit.v / s2;
            const double gseff =
                grho * (-(hit.u * hit.u + hit.v * hit.v) / (s2 * p.s_eff));

            const Vec3 delta = hit.tstar * ray - p.mu_cam;
            const Vec3 gdelta = gu * p.r_cam.col(0) + gv * p.r_cam.col(1);
            const double gt = dt_payload + gdelta.dot(ray);
            Vec3 gmu = -gdelta + gt * nvec / hit.denom;
            const Vec3 gn = -gt * delta / hit.denom + dn_payload;
            if (p.s_clamped) gmu.z() += gseff / f_mean_;

            acc.dmu_cam[i] += gmu;
            acc.dr_cam[i].col(0) += gu * delta;
            acc.dr_cam[i].col(1) += gv * delta;
            acc.dr_cam[i].col(2) += gn;
            if (!p.s_clamped) acc.ds[i] += gseff;
          }
        }
      }
    }
  });

  for (int c = 1; c < nchunks; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      accums[0].dmu_cam[i] += accums[c].dmu_cam[i];
      accums[0].dr_cam[i] += accums[c].dr_cam[i];
      accums[0].dc[i] += accums[c].dc[i];
    }
    accums[0].ds += accums[c].ds;
    accums[0].dtau += accums[c].dtau;
  }

  RenderGradients out;
  out.dpositions.assign(n, Vec3::Zero());
  out.drotations.assign(n, Mat3::Zero());
  out.dscales = std::move(accums[0].ds);
  out.dcolors = std::move(accums[0].dc);
  out.docclusion = std::move(accums[0].dtau);
  const Mat3 r_e_t = cam_.extrinsics.leftCols<3>().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.dpositions[i] = r_e_t * accums[0].dmu_cam[i];
    out.drotations[i] = r_e_t * accums[0].dr_cam[i];
  }
  return out;
}

RenderOutput render_posed(const PosedSurfels& surfels, const Camera& camera,
                          const RenderRequest& request) {
  Rasterizer r;
  return r.forward(surfels, camera, request);
}

}  // namespace soar
