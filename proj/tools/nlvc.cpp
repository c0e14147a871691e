// Command-line front end: encode, decode, verify, stats, info, init-weights.
//
// Exit codes: 0 success, 1 runtime failure (I/O, corrupt input, lossless check failed),
// 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "nlvc/nlvc.hpp"

namespace {

using namespace nlvc;

// Raised for option combinations CLI11 cannot express; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Video read_video(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto video = read_y4m(in);
  if (video.frames.empty()) throw std::runtime_error(path + " contains no frames");
  return video;
}

struct ModelOptions {
  std::string model = "adaptive";
  std::string weights;
  std::string pweights;
};

ModelKind parse_kind(const std::string& name) {
  if (name == "uniform") return ModelKind::uniform;
  if (name == "adaptive") return ModelKind::adaptive;
  return ModelKind::transformer;
}

// Without --pweights the I-frame weights serve P-frames as well.
ModelSet build_models(ModelKind kind, const ModelOptions& opt) {
  switch (kind) {
    case ModelKind::uniform: return ModelSet::uniform();
    case ModelKind::adaptive: return ModelSet::adaptive();
    case ModelKind::transformer: break;
  }
  if (opt.weights.empty()) throw UsageError("the transformer model needs --weights");
  auto i = std::make_shared<const ModelWeights>(load_weights_file(opt.weights));
  auto p = opt.pweights.empty() ? i : std::make_shared<const ModelWeights>(load_weights_file(opt.pweights));
  if (i->config.has_reference_embedding)
    throw UsageError("--weights must be I-frame weights without a reference embedding");
  return ModelSet::transformer(i, p);
}

void add_model_options(CLI::App* cmd, ModelOptions& opt, bool with_kind) {
  if (with_kind)
    cmd->add_option("--model", opt.model, "Entropy model")
        ->check(CLI::IsMember({"uniform", "adaptive", "transformer"}))
        ->capture_default_str();
  cmd->add_option("--weights", opt.weights, "I-frame transformer weights (NLVW)")->check(CLI::ExistingFile);
  cmd->add_option("--pweights", opt.pweights, "P-frame transformer weights (NLVW)")->check(CLI::ExistingFile);
}

void print_report_summary(const RateReport& r) {
  std::printf("frames=%zu bits=%zu rate=%.4f%% I-share=%.4f\n", r.frames.size(), r.total_bits,
              r.video_rate_percent(), r.share_of(FrameType::I));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless video codec with learned entropy models"};
  app.require_subcommand(1);

  ModelOptions mopt;
  CodecConfig cfg;
  std::string input, output, report_path, framerate = "30:1";

  auto add_codec_options = [&](CLI::App* cmd) {
    cmd->add_option("--delta", cfg.delta, "Group schedule slope")->check(CLI::Range(0, 255))->capture_default_str();
    cmd->add_option("--gop", cfg.gop_length, "Intra period, 0 for first frame only")
        ->check(CLI::Range(0, 65535))
        ->capture_default_str();
    cmd->add_option("--threads", cfg.threads, "Worker threads (0: NLVC_THREADS or all cores)");
    add_model_options(cmd, mopt, true);
  };

  auto* enc = app.add_subcommand("encode", "Compress a Y4M file");
  enc->add_option("input", input, "Input .y4m")->required()->check(CLI::ExistingFile);
  enc->add_option("output", output, "Output .nlvc")->required();
  enc->add_option("--report", report_path, "Write per-patch bit costs as CSV");
  add_codec_options(enc);

  auto* dec = app.add_subcommand("decode", "Decompress to Y4M");
  dec->add_option("input", input, "Input .nlvc")->required()->check(CLI::ExistingFile);
  dec->add_option("output", output, "Output .y4m")->required();
  dec->add_option("--framerate", framerate, "F tag for the output header")->capture_default_str();
  dec->add_option("--threads", cfg.threads, "Worker threads");
  add_model_options(dec, mopt, false);

  auto* ver = app.add_subcommand("verify", "Encode, decode and compare");
  ver->add_option("input", input, "Input .y4m")->required()->check(CLI::ExistingFile);
  add_codec_options(ver);

  auto* st = app.add_subcommand("stats", "Order-0 token entropy of a Y4M file");
  st->add_option("input", input, "Input .y4m")->required()->check(CLI::ExistingFile);

  auto* inf = app.add_subcommand("info", "Describe an .nlvc file");
  inf->add_option("input", input, "Input .nlvc")->required()->check(CLI::ExistingFile);
  inf->add_option("--report", report_path, "Write the per-frame rate series as CSV");

  bool with_reference = false, full_size = false;
  std::uint64_t seed = 1;
  float stddev = 0.02f;
  auto* initw = app.add_subcommand("init-weights", "Write randomly initialized transformer weights");
  initw->add_option("output", output, "Output .nlvw")->required();
  initw->add_flag("--reference", with_reference, "Include the reference embedding (P-frame model)");
  initw->add_flag("--full", full_size, "8 layers, width 384 (default: 1 layer, width 8)");
  initw->add_option("--seed", seed)->capture_default_str();
  initw->add_option("--stddev", stddev)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*enc || *ver) {
      const auto kind = parse_kind(mopt.model);
      const auto models = build_models(kind, mopt);
      const auto video = read_video(input);
      const auto bytes = encode_video(video, cfg, models);
      if (*enc) {
        write_file(output, bytes);
        const auto report = rate_report(bytes);
        if (!report_path.empty()) write_text(report_path, report.patch_csv());
        print_report_summary(report);
        return 0;
      }
      const auto back = decode_video(bytes, models, cfg.threads);
      const bool ok = back.frames == video.frames;
      print_report_summary(rate_report(bytes));
      std::printf("LOSSLESS: %s\n", ok ? "OK" : "FAILED");
      return ok ? 0 : 1;
    }

    if (*dec) {
      const auto bytes = read_file(input);
      const auto header = read_header(bytes);
      const auto models = build_models(header.model_kind, mopt);
      const auto decoded = decode_video(bytes, models, cfg.threads);
      Video video;
      video.header.width = header.width;
      video.header.height = header.height;
      video.header.chroma = header.chroma;
      video.header.framerate = framerate;
      video.header.frame_count = decoded.frames.size();
      video.frames = decoded.frames;
      std::ofstream out(output, std::ios::binary);
      if (!out) throw std::runtime_error("cannot create " + output);
      write_y4m(out, video);
      if (!out) throw std::runtime_error("failed writing " + output);
      return 0;
    }

    if (*st) {
      const auto video = read_video(input);
      const auto tokens = tokenize_video(video.frames);
      const auto i = order0_entropy(tokens.iframe, "I");
      std::printf("I order0 = %.6f bits/token (%zu tokens)\n", i.bits_per_token, i.token_count);
      if (!tokens.pframe.empty()) {
        const auto p = order0_entropy(tokens.pframe, "P");
        std::printf("P order0 = %.6f bits/token (%zu tokens)\n", p.bits_per_token, p.token_count);
      }
      return 0;
    }

    if (*inf) {
      const auto bytes = read_file(input);
      const auto report = rate_report(bytes);
      const auto& h = report.header;
      std::printf("width=%u height=%u frames=%u chroma=%s\n", h.width, h.height, h.frame_count,
                  h.chroma == Chroma::mono ? "mono" : "420");
      std::printf("delta=%u groups=%zu gop=%u model=%s hash=%016llx\n", h.delta, h.group_count(), h.gop_length,
                  model_kind_name(h.model_kind), static_cast<unsigned long long>(h.model_hash));
      print_report_summary(report);
      const auto rows = per_frame_rate_series(report);
      for (const auto& r : rows)
        std::printf("frame %zu %c %.4f%%\n", r.frame, r.type == FrameType::I ? 'I' : 'P', r.rate_percent);
      if (!report_path.empty()) write_text(report_path, rate_series_csv(rows));
      return 0;
    }

    if (*initw) {
      const auto config = full_size ? ModelConfig::full(with_reference) : ModelConfig::tiny(with_reference);
      auto weights = random_weights(config, seed, stddev);
      save_weights_file(weights, output);
      std::printf("parameters=%zu hash=%016llx\n", weights.parameter_count(),
                  static_cast<unsigned long long>(weights.hash));
      return 0;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "nlvc: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nlvc: %s\n", e.what());
    return 1;
  }
  return 2;
}
