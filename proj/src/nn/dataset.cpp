#include "nn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace edgeboost::nn {

void validate(const Dataset& ds) {
  require(ds.class_count >= 1, ErrorCode::invalid_input, "dataset class_count must be >= 1");
  for (const auto* split : {&ds.train, &ds.eval, &ds.test}) {
    for (const auto& s : *split) {
      require(s.input.size() == ds.shape.size(), ErrorCode::invalid_input,
              "dataset sample does not match input shape");
      require(s.label >= 0 && s.label < ds.class_count, ErrorCode::invalid_input,
              "dataset label out of range");
    }
  }
}

namespace {

struct Blob {
  double cx, cy, sigma;
  std::vector<double> colour;
};

void paint(std::vector<double>& img, const TensorShape& shape, const Blob& b, double cx, double cy,
           double amp) {
  const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
  for (int c = 0; c < shape.channels; ++c) {
    const double a = amp * b.colour[static_cast<std::size_t>(c)];
    for (int y = 0; y < shape.height; ++y)
      for (int x = 0; x < shape.width; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x] += a * std::exp(-d2 * inv);
      }
  }
}

}  // namespace

Dataset make_blob_dataset(const BlobDatasetOptions& opt) {
  require(opt.classes >= 2, ErrorCode::invalid_input, "blob dataset needs >= 2 classes");
  require(opt.shape.size() >= 1 && opt.blobs_per_class >= 1, ErrorCode::invalid_input,
          "blob dataset shape/blobs invalid");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ux(0.5, opt.shape.width - 1.5);
  std::uniform_real_distribution<double> uy(0.5, opt.shape.height - 1.5);
  std::uniform_real_distribution<double> us(0.8, 1.6);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<Blob>> protos(static_cast<std::size_t>(opt.classes));
  for (auto& cls : protos) {
    for (int b = 0; b < opt.blobs_per_class; ++b) {
      Blob blob{ux(rng), uy(rng), us(rng), {}};
      double norm = 0.0;
      for (int c = 0; c < opt.shape.channels; ++c) {
        blob.colour.push_back(gauss(rng));
        norm += blob.colour.back() * blob.colour.back();
      }
      norm = std::sqrt(std::max(norm, 1e-12));
      for (auto& v : blob.colour) v *= std::sqrt(static_cast<double>(opt.shape.channels)) / norm;
      cls.push_back(std::move(blob));
    }
  }

  std::uniform_int_distribution<int> pick_class(0, opt.classes - 1);
  std::uniform_int_distribution<int> pick_blob(0, opt.blobs_per_class - 1);
  auto make = [&](int n) {
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int label = i % opt.classes;
      std::vector<double> img(opt.shape.size(), 0.0);
      for (const auto& b : protos[static_cast<std::size_t>(label)]) {
        const double amp = 1.0 + 0.2 * gauss(rng);
        paint(img, opt.shape, b, b.cx + opt.jitter * gauss(rng), b.cy + opt.jitter * gauss(rng), amp);
      }
      if (opt.distractor > 0.0) {
        int other = pick_class(rng);
        if (other == label) other = (other + 1) % opt.classes;
        const auto& b = protos[static_cast<std::size_t>(other)][static_cast<std::size_t>(pick_blob(rng))];
        paint(img, opt.shape, b, b.cx + opt.jitter * gauss(rng), b.cy + opt.jitter * gauss(rng),
              opt.distractor * (1.0 + 0.2 * gauss(rng)));
      }
      for (auto& v : img) v += opt.noise * gauss(rng);
      out.push_back({std::move(img), label});
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  };

  Dataset ds;
  ds.shape = opt.shape;
  ds.class_count = opt.classes;
  ds.train = make(opt.train_size);
  ds.eval = make(opt.eval_size);
  ds.test = make(opt.test_size);
  if (opt.label_shift != 0) ds = shift_labels(std::move(ds), opt.label_shift);
  return ds;
}

Dataset shift_labels(Dataset ds, int shift) {
  const int c = ds.class_count;
  for (auto* split : {&ds.train, &ds.eval, &ds.test})
    for (auto& s : *split) s.label = ((s.label + shift) % c + c) % c;
  return ds;
}

std::vector<Sample> load_csv_samples(const std::string& path, const TensorShape& shape, int classes) {
  std::istringstream in(read_file(path));
  std::vector<Sample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    double label_value = 0.0;
    if (!parse_double(fields.front(), label_value)) {
      if (line_no == 1) continue;  // header
      fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": bad label");
    }
    if (fields.size() != shape.size() + 1)
      fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": expected " +
                                       std::to_string(shape.size() + 1) + " fields, got " +
                                       std::to_string(fields.size()));
    const int label = static_cast<int>(label_value);
    if (label != label_value || label < 0 || label >= classes)
      fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": label out of range");
    Sample s{std::vector<double>(shape.size()), label};
    for (std::size_t k = 0; k < shape.size(); ++k)
      if (!parse_double(fields[k + 1], s.input[k]))
        fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": bad pixel value");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace edgeboost::nn
