#include <doctest.h>

#include "soar/core/rng.hpp"
#include "soar/geom/mesh.hpp"
#include "soar/loss/image_loss.hpp"
#include "soar/loss/perceptual.hpp"
#include "soar/loss/regularizers.hpp"
#include "soar/loss/robust.hpp"
#include "soar/loss/tensor_archive.hpp"
#include "soar/render/camera.hpp"
#include "soar/synth/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

using namespace soar;

namespace {

Image rand_image(int w, int h, int c, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Image img(w, h, c);
  for (size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(lo, hi);
  return img;
}

Image rand_unit_normals(int w, int h, Rng& rng) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Vec3 n(rng.normal(), rng.normal(), rng.normal());
      while (n.norm() < 1e-3) n = Vec3(rng.normal(), rng.normal(), rng.normal());
      img.set_pixel3(x, y, n.normalized());
    }
  return img;
}

// Direct per-window SSIM, written from the definition with its own window
// construction and accumulation order.
double ssim_oracle(const Image& a, const Image& b, const Image* region = nullptr) {
  int win = std::min(11, std::min(a.width(), a.height()));
  if (win % 2 == 0) --win;
  const int r = win / 2;
  const double c1 = 1e-4, c2 = 9e-4;

  double wsum = 0.0;
  std::vector<double> w;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      w.push_back(std::exp(-(dx * dx + dy * dy) / 4.5));
      wsum += w.back();
    }

  double total = 0.0;
  std::int64_t n = 0;
  for (int cy = r; cy + r < a.height(); ++cy)
    for (int cx = r; cx + r < a.width(); ++cx) {
      if (region && region->at(cx, cy) <= 0.5) continue;
      for (int c = 0; c < a.channels(); ++c) {
        double ma = 0, mb = 0;
        size_t k = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx, ++k) {
            ma += w[k] / wsum * a.at(cx + dx, cy + dy, c);
            mb += w[k] / wsum * b.at(cx + dx, cy + dy, c);
          }
        double va = 0, vb = 0, cov = 0;
        k = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx, ++k) {
            const double da = a.at(cx + dx, cy + dy, c) - ma;
            const double db = b.at(cx + dx, cy + dy, c) - mb;
            va += w[k] / wsum * da * da;
            vb += w[k] / wsum * db * db;
            cov += w[k] / wsum * da * db;
          }
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va * vb >= 0 ? va + vb + c2
                                                           : va + vb + c2));
        ++n;
      }
    }
  return total / static_cast<double>(n);
}

// Central differences over every element of `img`.
Image fd_image(Image& img, const std::function<double()>& loss, double h) {
  Image g(img.width(), img.height(), img.channels());
  for (size_t i = 0; i < img.size(); ++i) {
    const double x0 = img.data()[i];
    img.data()[i] = x0 + h;
    const double hi = loss();
    img.data()[i] = x0 - h;
    const double lo = loss();
    img.data()[i] = x0;
    g.data()[i] = (hi - lo) / (2 * h);
  }
  return g;
}

double image_rel_err(const Image& analytic, const Image& fd) {
  double num = 0, den = 0;
  for (size_t i = 0; i < fd.size(); ++i) {
    num += (analytic.data()[i] - fd.data()[i]) * (analytic.data()[i] - fd.data()[i]);
    den += fd.data()[i] * fd.data()[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-9);
}

struct ZeroPerceptual final : PerceptualDistance {
  double distance(const Image& a, const Image& b, Image* db) const override {
    if (db) *db = Image(b.width(), b.height(), b.channels());
    return 0.0;
  }
  std::string describe() const override { return "zero"; }
};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_feature_archive(int in_channels) {
  Rng rng(99);
  const auto tensor = [&](const std::string& name, std::vector<std::int64_t> dims) {
    NamedTensor t;
    t.name = name;
    t.dims = std::move(dims);
    t.data.resize(t.element_count());
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = 0.4 * rng.normal();
    return t;
  };
  std::vector<NamedTensor> tensors;
  tensors.push_back(tensor("conv0.weight", {4, in_channels, 3, 3}));
  tensors.push_back(tensor("conv0.bias", {4}));
  tensors.push_back(tensor("conv1.weight", {5, 4, 3, 3}));
  tensors.push_back(tensor("conv1.bias", {5}));
  const std::string path = temp_path("soar_loss_feature_weights.bin");
  write_tensor_archive(path, tensors);
  return path;
}

}  // namespace

TEST_CASE("ssim of identical images is exactly one") {
  Rng rng(11);
  const Image a = rand_image(16, 16, 1, rng);
  CHECK(ssim(a, a) == 1.0);
  const Image c = rand_image(13, 12, 3, rng);
  CHECK(ssim(c, c) == 1.0);
}

TEST_CASE("ssim drops below one for distinct images and matches the oracle") {
  Rng rng(12);
  const Image a = rand_image(16, 16, 1, rng);
  Image inv = a;
  for (size_t i = 0; i < inv.size(); ++i) inv.data()[i] = 1.0 - inv.data()[i];
  CHECK(ssim(a, inv) < 1.0);

  const Image b = rand_image(16, 16, 1, rng);
  CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-6));

  const Image a3 = rand_image(17, 16, 3, rng);
  const Image b3 = rand_image(17, 16, 3, rng);
  CHECK(ssim(a3, b3) == doctest::Approx(ssim_oracle(a3, b3)).epsilon(1e-6));

  // Window shrinks to min(11, W, H) forced odd on small inputs.
  const Image s1 = rand_image(8, 10, 1, rng);
  const Image s2 = rand_image(8, 10, 1, rng);
  CHECK(ssim(s1, s2) == doctest::Approx(ssim_oracle(s1, s2)).epsilon(1e-6));
}

TEST_CASE("ssim restricted to a region matches the restricted oracle") {
  Rng rng(13);
  const Image a = rand_image(16, 14, 1, rng);
  const Image b = rand_image(16, 14, 1, rng);
  Image region(16, 14, 1);
  for (size_t i = 0; i < region.size(); ++i) region.data()[i] = rng.uniform() < 0.4;
  CHECK(ssim(a, b, nullptr, &region) ==
        doctest::Approx(ssim_oracle(a, b, &region)).epsilon(1e-6));

  Image empty(16, 14, 1);
  CHECK(ssim(a, b, nullptr, &empty) == 1.0);
}

TEST_CASE("ssim gradient matches finite differences") {
  Rng rng(14);
  const Image a = rand_image(9, 8, 2, rng);
  Image b = rand_image(9, 8, 2, rng);
  Image db;
  ssim(a, b, &db);
  const Image fd = fd_image(b, [&] { return ssim(a, b); }, 1e-5);
  CHECK(image_rel_err(db, fd) < 1e-3);
}

TEST_CASE("mask loss trivial values and exact gradient") {
  Rng rng(15);
  const Image m = rand_image(8, 8, 1, rng);
  CHECK(mask_loss(m, m) == 0.0);

  Image ones(8, 8, 1, 1.0), zeros(8, 8, 1, 0.0);
  CHECK(mask_loss(ones, zeros) == 1.0);

  Image target = rand_image(8, 8, 1, rng);
  Image render = rand_image(8, 8, 1, rng);
  Image grad;
  mask_loss(target, render, &grad);
  for (size_t i = 0; i < grad.size(); ++i) {
    const double s = render.data()[i] > target.data()[i] ? 1.0 : -1.0;
    CHECK(grad.data()[i] == s / 64.0);
  }
  const Image fd = fd_image(render, [&] { return mask_loss(target, render); }, 1e-5);
  CHECK(image_rel_err(grad, fd) < 1e-3);
}

TEST_CASE("mask loss respects the region") {
  Rng rng(16);
  const Image target = rand_image(6, 6, 1, rng);
  const Image render = rand_image(6, 6, 1, rng);
  Image region(6, 6, 1);
  region.at(1, 2) = region.at(4, 4) = region.at(0, 0) = 1.0;
  double manual = 0.0;
  const std::array<std::array<int, 2>, 3> picks = {{{1, 2}, {4, 4}, {0, 0}}};
  for (const auto& p : picks)
    manual += std::abs(render.at(p[0], p[1]) - target.at(p[0], p[1])) / 3.0;
  CHECK(mask_loss(target, render, nullptr, &region) == doctest::Approx(manual));
}

TEST_CASE("rgb loss is zero at the identity and matches the constant-image form") {
  Rng rng(17);
  const PyramidPerceptual pd;
  const Image img = rand_image(16, 16, 3, rng);
  CHECK(rgb_loss(img, img, pd) == 0.0);

  const Image zeros(16, 16, 3, 0.0), ones(16, 16, 3, 1.0);
  const double expected =
      0.2 * 1.0 + 0.8 * (1.0 - ssim_oracle(zeros, ones)) / 2.0 + 1.0;
  CHECK(rgb_loss(zeros, ones, pd) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("rgb loss gradient matches finite differences") {
  Rng rng(18);
  const Image target = rand_image(8, 8, 3, rng);
  Image render = rand_image(8, 8, 3, rng);
  const PyramidPerceptual pd;
  Image grad;
  rgb_loss(target, render, pd, &grad);
  const Image fd =
      fd_image(render, [&] { return rgb_loss(target, render, pd); }, 1e-4);
  CHECK(image_rel_err(grad, fd) < 1e-3);
}

TEST_CASE("rgb loss gradient with region and feature perceptual") {
  Rng rng(19);
  const Image target = rand_image(8, 8, 3, rng);
  Image render = rand_image(8, 8, 3, rng);
  Image region(8, 8, 1);
  for (size_t i = 0; i < region.size(); ++i) region.data()[i] = rng.uniform() < 0.6;
  const FeaturePerceptual pd(write_feature_archive(3));
  Image grad;
  rgb_loss(target, render, pd, &grad, &region);
  const Image fd = fd_image(
      render, [&] { return rgb_loss(target, render, pd, nullptr, &region); }, 1e-4);
  // Out-of-region pixels still feel SSIM through window support, so the FD
  // sweep over every pixel is the full statement of the region semantics.
  CHECK(image_rel_err(grad, fd) < 1e-3);
}

TEST_CASE("normal loss is zero at the identity and scores antipodal maps") {
  Rng rng(20);
  const Image nf = rand_unit_normals(9, 9, rng);
  const Image nb = rand_unit_normals(9, 9, rng);
  Image valid(9, 9, 1, 1.0);
  valid.at(0, 0) = valid.at(5, 3) = 0.0;
  const PyramidPerceptual pd;
  CHECK(normal_loss(nf, nb, nf, nb, valid, pd) == 0.0);

  Image anti = nf;
  for (size_t i = 0; i < anti.size(); ++i) anti.data()[i] = -anti.data()[i];
  const auto encode = [&](const Image& n) {
    Image e(n.width(), n.height(), 3);
    for (int y = 0; y < n.height(); ++y)
      for (int x = 0; x < n.width(); ++x)
        e.set_pixel3(x, y, valid.at(x, y) > 0.5
                               ? Vec3((n.pixel3(x, y) + Vec3::Ones()) / 2.0)
                               : Vec3::Zero());
    return e;
  };
  const double expected = 0.4 + pd.distance(encode(nf), encode(anti));
  CHECK(normal_loss(nf, nb, anti, nb, valid, pd) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("normal loss cosine term matches a per-pixel loop") {
  Rng rng(21);
  const Image tf = rand_unit_normals(7, 6, rng);
  const Image tb = rand_unit_normals(7, 6, rng);
  const Image rf = rand_unit_normals(7, 6, rng);
  const Image rb = rand_unit_normals(7, 6, rng);
  Image valid(7, 6, 1);
  for (size_t i = 0; i < valid.size(); ++i) valid.data()[i] = rng.uniform() < 0.7;
  const ZeroPerceptual zero;

  double front = 0, back = 0;
  std::int64_t n = 0;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x)
      if (valid.at(x, y) > 0.5) {
        front += tf.pixel3(x, y).dot(rf.pixel3(x, y));
        back += tb.pixel3(x, y).dot(rb.pixel3(x, y));
        ++n;
      }
  const double expected = 0.2 * (1.0 - front / n) + 0.2 * (1.0 - back / n);
  CHECK(normal_loss(tf, tb, rf, rb, valid, zero) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("normal loss gradients match finite differences") {
  Rng rng(22);
  const Image tf = rand_unit_normals(8, 8, rng);
  const Image tb = rand_unit_normals(8, 8, rng);
  Image rf = rand_unit_normals(8, 8, rng);
  Image rb = rand_unit_normals(8, 8, rng);
  Image valid(8, 8, 1);
  for (size_t i = 0; i < valid.size(); ++i) valid.data()[i] = rng.uniform() < 0.8;
  const PyramidPerceptual pd;
  Image dfront, dback;
  normal_loss(tf, tb, rf, rb, valid, pd, &dfront, &dback);
  const auto loss = [&] { return normal_loss(tf, tb, rf, rb, valid, pd); };
  CHECK(image_rel_err(dfront, fd_image(rf, loss, 1e-4)) < 1e-3);
  CHECK(image_rel_err(dback, fd_image(rb, loss, 1e-4)) < 1e-3);
}

TEST_CASE("geman-mcclure values, saturation, monotonicity and gradient") {
  VecX r(1);
  r << 0.0;
  CHECK(geman_mcclure(r, 2.0) == 0.0);
  r << 2.0;
  CHECK(geman_mcclure(r, 2.0) == 2.0);  // sigma^2 / 2 at r = sigma
  r << 2e6;
  CHECK(geman_mcclure(r, 2.0) == doctest::Approx(4.0).epsilon(1e-6));

  double prev = -1.0;
  for (double x = 0.0; x < 30.0; x += 0.37) {
    r << x;
    const double v = geman_mcclure(r, 2.0);
    CHECK(v >= prev);
    CHECK(v <= 4.0);
    prev = v;
  }

  Rng rng(23);
  VecX res(6), grad;
  for (int i = 0; i < 6; ++i) res[i] = rng.uniform(-8.0, 8.0);
  const double v0 = geman_mcclure(res, 3.0, &grad);
  CHECK(v0 > 0.0);
  VecX fd(6);
  for (int i = 0; i < 6; ++i) {
    const double x0 = res[i], h = 1e-5;
    res[i] = x0 + h;
    const double hi = geman_mcclure(res, 3.0);
    res[i] = x0 - h;
    const double lo = geman_mcclure(res, 3.0);
    res[i] = x0;
    fd[i] = (hi - lo) / (2 * h);
  }
  CHECK((grad - fd).norm() / fd.norm() < 1e-3);

  CHECK(keypoint_sigma(512, 512) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(keypoint_sigma(1024, 1024) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("perceptual implementations satisfy the interface invariants") {
  const std::string path = write_feature_archive(3);
  const PyramidPerceptual pyr;
  const FeaturePerceptual feat(path);
  const std::vector<const PerceptualDistance*> impls = {&pyr, &feat};
  Rng rng(24);
  for (const PerceptualDistance* pd : impls) {
    for (int trial = 0; trial < 10; ++trial) {
      const Image a = rand_image(10, 9, 3, rng);
      const Image b = rand_image(10, 9, 3, rng);
      const double dab = pd->distance(a, b);
      CHECK(dab >= 0.0);
      CHECK(dab == pd->distance(b, a));
      CHECK(pd->distance(a, a) == 0.0);
    }
  }
}

TEST_CASE("pyramid distance averages level mean absolute differences") {
  const Image zeros(16, 16, 1, 0.0);
  const Image c(16, 16, 1, 0.375);
  const PyramidPerceptual pd;
  CHECK(pd.distance(zeros, c) == 0.375);  // every level sees the same constant
}

TEST_CASE("pyramid gradient matches finite differences on block-signed offsets") {
  Rng rng(25);
  const Image a = rand_image(8, 8, 2, rng, 0.2, 0.8);
  Image b = a;
  // Sign constant on 4x4 blocks keeps every pooled difference far from zero.
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const double s = ((x / 4 + y / 4) % 2 == 0) ? 1.0 : -1.0;
      for (int c = 0; c < 2; ++c)
        b.at(x, y, c) = a.at(x, y, c) + s * rng.uniform(0.05, 0.15);
    }
  const PyramidPerceptual pd;
  Image db;
  pd.distance(a, b, &db);
  const Image fd = fd_image(b, [&] { return pd.distance(a, b); }, 1e-6);
  CHECK(image_rel_err(db, fd) < 1e-3);
}

TEST_CASE("feature distance gradient matches finite differences") {
  const FeaturePerceptual pd(write_feature_archive(2));
  Rng rng(26);
  const Image a = rand_image(9, 7, 2, rng);
  Image b = rand_image(9, 7, 2, rng);
  Image db;
  pd.distance(a, b, &db);
  const Image fd = fd_image(b, [&] { return pd.distance(a, b); }, 1e-6);
  CHECK(image_rel_err(db, fd) < 1e-3);
}

TEST_CASE("make_perceptual picks the implementation by weight availability") {
  CHECK(make_perceptual("")->describe() == "pyramid");
  CHECK(make_perceptual(temp_path("soar_no_such_weights.bin"))->describe() ==
        "pyramid");
  CHECK(make_perceptual(write_feature_archive(3))->describe() == "feature");
}

TEST_CASE("tensor archive round-trips bitwise and rejects corruption") {
  Rng rng(27);
  std::vector<NamedTensor> tensors(2);
  tensors[0].name = "conv0.weight";
  tensors[0].dims = {2, 3, 3, 3};
  tensors[1].name = "stats/empty";
  tensors[1].dims = {0};
  tensors[1].data.resize(0);
  tensors[0].data.resize(tensors[0].element_count());
  for (Eigen::Index i = 0; i < tensors[0].data.size(); ++i)
    tensors[0].data[i] = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));

  const std::string path = temp_path("soar_archive_roundtrip.bin");
  write_tensor_archive(path, tensors);
  const std::vector<NamedTensor> back = read_tensor_archive(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "conv0.weight");
  CHECK(back[0].dims == tensors[0].dims);
  CHECK(back[0].data == tensors[0].data);
  CHECK(back[1].element_count() == 0);

  CHECK_THROWS_AS(read_tensor_archive(temp_path("soar_archive_missing.bin")),
                  IoError);

  std::ofstream bad(temp_path("soar_archive_bad.bin"), std::ios::binary);
  bad << "NOTANARCHIVE";
  bad.close();
  CHECK_THROWS_AS(read_tensor_archive(temp_path("soar_archive_bad.bin")), IoError);

  // Truncation inside the payload.
  std::ifstream in(path, std::ios::binary);
  std::string blob((std::istreambuf_iterator<char>(in)), {});
  in.close();
  std::ofstream trunc(temp_path("soar_archive_trunc.bin"), std::ios::binary);
  trunc.write(blob.data(), static_cast<std::streamsize>(blob.size() / 2));
  trunc.close();
  CHECK_THROWS_AS(read_tensor_archive(temp_path("soar_archive_trunc.bin")), IoError);
}

TEST_CASE("loss region is the dilated union of the masks") {
  Image t(7, 7, 1), r(7, 7, 1);
  t.at(1, 1) = 1.0;
  r.at(5, 4) = 1.0;
  const Image region = loss_region(t, r, 1);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      const bool expect = (std::abs(x - 1) <= 1 && std::abs(y - 1) <= 1) ||
                          (std::abs(x - 5) <= 1 && std::abs(y - 4) <= 1);
      CHECK(region.at(x, y) == (expect ? 1.0 : 0.0));
    }
}

TEST_CASE("normal-depth consistency vanishes on planes") {
  Camera cam;
  cam.intrinsics = make_intrinsics(20.0, 20.0, 4.5, 4.5);
  cam.width = cam.height = 9;

  Image depth(9, 9, 1, 2.0), alpha(9, 9, 1, 1.0);
  Image normal(9, 9, 3);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) normal.set_pixel3(x, y, Vec3(0, 0, -1));
  CHECK(normal_depth_consistency(depth, normal, alpha, cam) == 0.0);

  // Tilted plane: all central-difference points stay on it, so the derived
  // normal equals the plane normal everywhere.
  const Vec3 n = Vec3(0.3, -0.2, -1.0).normalized();
  const Vec3 p0(0.05, -0.02, 2.0);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      depth.at(x, y) = n.dot(p0) / n.dot(cam.pixel_ray(x, y));
      normal.set_pixel3(x, y, n);
    }
  alpha.at(3, 3) = 0.0;  // a hole only removes pixels, never adds error
  CHECK(normal_depth_consistency(depth, normal, alpha, cam) < 1e-12);
}

TEST_CASE("normal-depth consistency gradients match finite differences") {
  Camera cam;
  cam.intrinsics = make_intrinsics(12.0, 11.0, 4.0, 3.5);
  cam.width = 8;
  cam.height = 7;
  Rng rng(28);
  Image depth(8, 7, 1);
  for (size_t i = 0; i < depth.size(); ++i) depth.data()[i] = rng.uniform(1.5, 2.5);
  Image normal = rand_unit_normals(8, 7, rng);
  Image alpha(8, 7, 1, 1.0);
  alpha.at(6, 2) = 0.0;

  Image ddepth, dnormal;
  normal_depth_consistency(depth, normal, alpha, cam, &ddepth, &dnormal);
  const auto loss = [&] { return normal_depth_consistency(depth, normal, alpha, cam); };
  CHECK(image_rel_err(ddepth, fd_image(depth, loss, 1e-5)) < 1e-3);
  CHECK(image_rel_err(dnormal, fd_image(normal, loss, 1e-5)) < 1e-3);
}

TEST_CASE("curvature matches the analytic neighbor angle on a sphere") {
  TriMesh mesh = synth::icosahedron(1.0);
  mesh = subdivide_midpoint(subdivide_midpoint(mesh));
  for (Vec3& v : mesh.vertices) v.normalize();

  std::vector<Vec3> normals = mesh.vertices;  // radial
  const double value = curvature_penalty(mesh.vertices, normals);

  // Mean edge arc predicts 1 - cos of the 5-NN angular spacing.
  double arc = 0.0;
  std::int64_t edges = 0;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      const Vec3 a = mesh.vertices[f[e]], b = mesh.vertices[f[(e + 1) % 3]];
      arc += 2.0 * std::asin((a - b).norm() / 2.0);
      ++edges;  // each edge counted twice; the mean is unaffected
    }
  const double predicted = 1.0 - std::cos(arc / edges);
  CHECK(value == doctest::Approx(predicted).epsilon(0.1));

  // Identical normals are perfectly flat.
  std::vector<Vec3> flat(mesh.vertices.size(), Vec3(0, 0, 1));
  CHECK(curvature_penalty(mesh.vertices, flat) == 0.0);
}

TEST_CASE("curvature gradient is exact for its bilinear form") {
  Rng rng(29);
  std::vector<Vec3> pos, normals;
  for (int i = 0; i < 40; ++i) {
    pos.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    normals.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()).normalized());
  }
  std::vector<Vec3> grad;
  curvature_penalty(pos, normals, &grad);
  for (int i = 0; i < 40; ++i)
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6, x0 = normals[i][k];
      normals[i][k] = x0 + h;
      const double hi = curvature_penalty(pos, normals);
      normals[i][k] = x0 - h;
      const double lo = curvature_penalty(pos, normals);
      normals[i][k] = x0;
      CHECK(grad[i][k] == doctest::Approx((hi - lo) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("offset and scale penalties with exact gradients") {
  Rng rng(30);
  std::vector<Vec3> rest, pos;
  std::vector<double> labels, scales;
  for (int i = 0; i < 12; ++i) {
    rest.emplace_back(rng.normal(), rng.normal(), rng.normal());
    pos.push_back(rest.back() + 0.1 * Vec3(rng.normal(), rng.normal(), rng.normal()));
    labels.push_back(rng.uniform(0.1, 0.5));
    scales.push_back(labels.back() + rng.uniform(-0.05, 0.05));
  }
  CHECK(offset_penalty(rest, rest) == 0.0);
  CHECK(scale_penalty(labels, labels) == 0.0);

  std::vector<Vec3> dpos;
  double manual = 0.0;
  for (int i = 0; i < 12; ++i) manual += (pos[i] - rest[i]).squaredNorm() / 12.0;
  CHECK(offset_penalty(pos, rest, &dpos) == doctest::Approx(manual).epsilon(1e-12));
  for (int i = 0; i < 12; ++i)
    CHECK((dpos[i] - 2.0 * (pos[i] - rest[i]) / 12.0).norm() < 1e-15);

  std::vector<double> dscales;
  scale_penalty(scales, labels, &dscales);
  for (int i = 0; i < 12; ++i)
    CHECK(dscales[i] ==
          doctest::Approx(2.0 * (scales[i] - labels[i]) / 12.0).epsilon(1e-12));
}

TEST_CASE("loss weights validate nonnegativity") {
  LossWeights w;
  w.validate();
  w.curvature = -0.1;
  CHECK_THROWS_AS(w.validate(), ValidationError);
  w = LossWeights{};
  w.keypoint_sigma = 0.0;
  CHECK_THROWS_AS(w.validate(), ValidationError);
}
