#include <cmath>
#include <numbers>

#include "edagger/common/csv.hpp"
#include "edagger/common/errors.hpp"
#include "edagger/common/rng.hpp"
#include "edagger/exp/experiments.hpp"
#include "edagger/exp/svg.hpp"
#include "edagger/nn/train.hpp"
#include "edagger/uq/ensemble.hpp"

namespace edagger::exp {

namespace fs = std::filesystem;

namespace {

// Stream identifiers under the master seed.
constexpr std::uint64_t kGpStream = 0x9c;

using Predictor = std::function<std::pair<double, double>(double x)>;  // (mean, std)

ModelCurve evaluate(const std::string& name, const Predictor& predict, const GpCompareResult& data,
                    const GpCompareSettings& s) {
  ModelCurve curve;
  curve.model = name;
  double lo = data.train_x.front(), hi = data.train_x.front();
  for (double x : data.train_x) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  double far_sum = 0.0, hull_sum = 0.0;
  std::size_t far_n = 0, hull_n = 0;
  for (double x : data.query_x) {
    const auto [mean, sd] = predict(x);
    curve.mean.push_back(mean);
    curve.std_raw.push_back(sd);
    const double ax = std::abs(x);
    if (ax >= s.far_range.lo - 1e-12 && ax <= s.far_range.hi + 1e-12) {
      far_sum += sd;
      ++far_n;
    }
    if (x >= lo && x <= hi) {
      hull_sum += sd;
      ++hull_n;
    }
  }
  curve.std_far = far_n ? far_sum / static_cast<double>(far_n) : 0.0;
  curve.std_hull = hull_n ? hull_sum / static_cast<double>(hull_n) : 0.0;
  double se = 0.0;
  for (std::size_t i = 0; i < data.train_x.size(); ++i) {
    const double e = predict(data.train_x[i]).first - data.train_y[i];
    se += e * e;
  }
  curve.train_rmse = std::sqrt(se / static_cast<double>(data.train_x.size()));
  curve.ok = true;
  return curve;
}

nn::Matrix column(const std::vector<double>& v) {
  nn::Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

void write_curve(const fs::path& path, const GpCompareResult& r, const ModelCurve& c) {
  CsvWriter csv(path, {"x", "mean", "std_raw", "std_scaled"});
  for (std::size_t i = 0; i < c.mean.size(); ++i) {
    csv.cell(r.query_x[i]).cell(c.mean[i]).cell(c.std_raw[i]).cell(c.std_scaled[i]);
    csv.end_row();
  }
}

void write_svg(const fs::path& path, const GpCompareResult& r) {
  Svg svg(1000, 760);
  const double xmin = r.query_x.front(), xmax = r.query_x.back();
  for (std::size_t k = 0; k < r.models.size(); ++k) {
    const ModelCurve& c = r.models[k];
    const Axes axes{70.0 + 480.0 * static_cast<double>(k % 2), 50.0 + 360.0 * static_cast<double>(k / 2), 380, 260,
                    xmin, xmax, -3.0, 3.0};
    svg.frame(axes, c.ok ? c.model : c.model + " (failed)", "x", "f(x)");
    if (!c.ok) continue;
    std::vector<std::pair<double, double>> band, mean, truth;
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      const double y = std::clamp(c.mean[i] + 2.0 * c.std_scaled[i], -3.0, 3.0);
      band.emplace_back(axes.px(r.query_x[i]), axes.py(y));
      mean.emplace_back(axes.px(r.query_x[i]), axes.py(std::clamp(c.mean[i], -3.0, 3.0)));
      truth.emplace_back(axes.px(r.query_x[i]), axes.py(gp_compare_target(r.query_x[i])));
    }
    for (std::size_t i = c.mean.size(); i-- > 0;) {
      const double y = std::clamp(c.mean[i] - 2.0 * c.std_scaled[i], -3.0, 3.0);
      band.emplace_back(axes.px(r.query_x[i]), axes.py(y));
    }
    svg.polygon(band, palette(k), 0.25);
    svg.polyline(truth, "#888888", 1.0);
    svg.polyline(mean, palette(k), 2.0);
    for (std::size_t i = 0; i < r.train_x.size(); ++i) svg.circle(axes.px(r.train_x[i]), axes.py(r.train_y[i]), 3.5, "black");
  }
  svg.save(path);
}

}  // namespace

double gp_compare_target(double x) {
  return std::sin(std::numbers::pi * x) + 0.2 * std::sin(4.0 * std::numbers::pi * x);
}

const ModelCurve& GpCompareResult::model(const std::string& name) const {
  for (const ModelCurve& c : models)
    if (c.model == name) return c;
  throw std::out_of_range("no model named " + name);
}

GpCompareResult run_gp_compare(const ExperimentConfig& config, const fs::path& out_dir) {
  const GpCompareSettings& s = config.gp_compare;
  fs::create_directories(out_dir);
  GpCompareResult r;
  Rng data_rng(derive_seed(config.master_seed, {kGpStream, 0}));
  for (std::size_t i = 0; i < s.train_points; ++i) {
    const double x = data_rng.uniform(s.train_range.lo, s.train_range.hi);
    r.train_x.push_back(x);
    r.train_y.push_back(gp_compare_target(x));
  }
  for (std::size_t i = 0; i < s.query_points; ++i) {
    r.query_x.push_back(i + 1 == s.query_points
                            ? s.query_range.hi
                            : s.query_range.lo + (s.query_range.hi - s.query_range.lo) * static_cast<double>(i) /
                                                     static_cast<double>(s.query_points - 1));
  }
  {
    CsvWriter csv(out_dir / "training_data.csv", {"x", "y"});
    for (std::size_t i = 0; i < r.train_x.size(); ++i) {
      csv.cell(r.train_x[i]).cell(r.train_y[i]);
      csv.end_row();
    }
  }
  const nn::Matrix inputs = column(r.train_x);
  const nn::Matrix targets = column(r.train_y);

  const auto attempt = [&](const std::string& name, const std::function<Predictor()>& fit) {
    try {
      r.models.push_back(evaluate(name, fit(), r, s));
    } catch (const std::exception& e) {
      ModelCurve failed;
      failed.model = name;
      failed.error = e.what();
      r.models.push_back(failed);
    }
  };

  gp::GpModel gp_model;
  attempt("gp", [&]() -> Predictor {
    Eigen::MatrixXd x(r.train_x.size(), 1);
    Eigen::VectorXd y(r.train_y.size());
    for (std::size_t i = 0; i < r.train_x.size(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = r.train_x[i];
      y(static_cast<Eigen::Index>(i)) = r.train_y[i];
    }
    gp::GpFitOptions options = s.gp_fit;
    options.seed = derive_seed(config.master_seed, {kGpStream, 1});
    gp_model = gp::gp_fit(x, y, s.gp_init, options);
    r.gp_hyper = gp_model.hyper;
    return [&gp_model](double q) {
      const gp::GpPrediction p = gp::gp_posterior(gp_model, std::span<const double>(&q, 1));
      return std::pair{p.mean, p.std};
    };
  });

  std::vector<std::size_t> point_widths{1};
  point_widths.insert(point_widths.end(), s.hidden.begin(), s.hidden.end());
  std::vector<std::size_t> nll_widths = point_widths;
  point_widths.push_back(1);
  nll_widths.push_back(2);

  std::optional<uq::EnsemblePolicy> vanilla;
  attempt("vanilla_ensemble", [&]() -> Predictor {
    nn::TrainConfig t{s.vanilla_epochs, s.batch_size, s.vanilla_learning_rate, 0.0, nn::LossKind::Mse, 1.0,
                      derive_seed(config.master_seed, {kGpStream, 3})};
    vanilla = uq::train_ensemble(uq::EnsemblePolicy::initialized(point_widths, s.activation, nn::OutputHead::PointEstimate,
                                                                 s.members, derive_seed(config.master_seed, {kGpStream, 2})),
                                 inputs, targets, t);
    return [&vanilla](double q) {
      const uq::PredictiveDistribution d = uq::ensemble_predict(*vanilla, std::span<const double>(&q, 1));
      return std::pair{d.mean[0], std::sqrt(d.variance[0])};
    };
  });

  std::optional<uq::EnsemblePolicy> nll;
  attempt("nll_ensemble", [&]() -> Predictor {
    nn::TrainConfig t{s.nll_epochs, s.batch_size, s.nll_learning_rate, 0.0, nn::LossKind::GaussianNll, 1.0,
                      derive_seed(config.master_seed, {kGpStream, 5})};
    nll = uq::train_ensemble(uq::EnsemblePolicy::initialized(nll_widths, s.activation, nn::OutputHead::MeanAndLogVariance,
                                                             s.members, derive_seed(config.master_seed, {kGpStream, 4})),
                             inputs, targets, t);
    return [&nll](double q) {
      const uq::PredictiveDistribution d = uq::ensemble_predict(*nll, std::span<const double>(&q, 1));
      return std::pair{d.mean[0], std::sqrt(d.variance[0])};
    };
  });

  std::optional<nn::DenseNet> mc;
  Rng mc_rng(derive_seed(config.master_seed, {kGpStream, 8}));
  attempt("mc_dropout", [&]() -> Predictor {
    nn::TrainConfig t{s.mc_epochs, s.batch_size, s.mc_learning_rate, 0.0, nn::LossKind::Mse, s.mc_keep_prob,
                      derive_seed(config.master_seed, {kGpStream, 7})};
    mc = nn::train(nn::DenseNet::glorot_uniform(point_widths, s.activation, nn::OutputHead::PointEstimate,
                                                derive_seed(config.master_seed, {kGpStream, 6})),
                   inputs, targets, t);
    return [&](double q) {
      const uq::PredictiveDistribution d =
          uq::mc_dropout_predict(*mc, std::span<const double>(&q, 1), s.mc_samples, s.mc_keep_prob, mc_rng);
      return std::pair{d.mean[0], std::sqrt(d.variance[0])};
    };
  });

  double gp_total = 0.0;
  const ModelCurve& gp_curve = r.models.front();
  for (double v : gp_curve.std_raw) gp_total += v;
  for (ModelCurve& c : r.models) {
    if (!c.ok) continue;
    double total = 0.0;
    for (double v : c.std_raw) total += v;
    c.scale = (gp_curve.ok && total > 0.0) ? gp_total / total : 1.0;
    if (&c == &gp_curve) c.scale = 1.0;
    for (double v : c.std_raw) c.std_scaled.push_back(v * c.scale);
    write_curve(out_dir / (c.model + ".csv"), r, c);
  }

  {
    CsvWriter csv(out_dir / "summary.csv", {"model", "status", "train_rmse", "std_far", "std_hull", "scale"});
    for (const ModelCurve& c : r.models) {
      csv.cell(c.model).cell(c.ok ? std::string("ok") : "failed: " + c.error);
      if (c.ok) {
        csv.cell(c.train_rmse).cell(c.std_far).cell(c.std_hull).cell(c.scale);
      } else {
        csv.empty().empty().empty().empty();
      }
      csv.end_row();
    }
  }
  if (gp_curve.ok) {
    CsvWriter csv(out_dir / "gp_fit.csv", {"length_scale", "signal_variance", "noise_variance", "log_marginal_likelihood", "jitter"});
    csv.cell(gp_model.hyper.length_scale).cell(gp_model.hyper.signal_variance).cell(gp_model.hyper.noise_variance);
    csv.cell(gp_model.log_marginal_likelihood).cell(gp_model.jitter);
    csv.end_row();
  }
  write_svg(out_dir / "comparison.svg", r);
  return r;
}

}  // namespace edagger::exp
