#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "CLI11.hpp"
#include "wlauth/wlauth.hpp"

namespace {

wlauth::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return wlauth::Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, wlauth::ByteView data) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

wlauth::RunConfig load_config(const std::string& path) {
  auto raw = read_file(path);
  return wlauth::RunConfig::parse(std::string(raw.begin(), raw.end()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-chained multicast packet authentication toolkit"};
  app.require_subcommand(1);

  std::string in_path, out_path, config_path;
  std::uint64_t seed = 0;
  wlauth::cli::ModelArgs model_args;

  auto* sign = app.add_subcommand("sign", "Authenticate a raw stream into a packet archive");
  sign->add_option("--in", in_path, "raw stream file")->required();
  sign->add_option("--out", out_path, "packet archive to write")->required();
  sign->add_option("--config", config_path, "key=value config")->required();

  auto* verify = app.add_subcommand("verify", "Verify every packet of an archive");
  verify->add_option("--in", in_path, "packet archive")->required();
  verify->add_option("--config", config_path, "key=value config")->required();

  auto* model = app.add_subcommand("model", "Evaluate the analytical timing model as CSV");
  model->add_option("--config", config_path, "key=value config")->required();
  model->add_option("--sweep", model_args.sweep, "processor range, e.g. M=1..32");
  model->add_option("--topology", model_args.topology, "mps or cluster");
  model->add_option("--m", model_args.m_range, "cluster-count range");
  model->add_option("--k", model_args.k_range, "cluster-size range");

  auto* simulate = app.add_subcommand("simulate", "Replay an archive through a lossy channel");
  simulate->add_option("--in", in_path, "packet archive")->required();
  simulate->add_option("--config", config_path, "key=value config")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "channel seed (overrides config)");

  auto* bench = app.add_subcommand("bench", "Time the parallel engine against a sequential run");
  bench->add_option("--config", config_path, "key=value config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = load_config(config_path);
    if (sign->parsed()) {
      write_file(out_path, wlauth::cli::cmd_sign(read_file(in_path), cfg));
    } else if (verify->parsed()) {
      return wlauth::cli::cmd_verify(read_file(in_path), cfg, std::cout, std::cerr);
    } else if (model->parsed()) {
      std::cout << wlauth::cli::cmd_model(cfg, model_args);
    } else if (simulate->parsed()) {
      if (*seed_opt) cfg.channel.seed = seed;
      std::cout << wlauth::cli::cmd_simulate(read_file(in_path), cfg);
    } else if (bench->parsed()) {
      std::cout << wlauth::cli::cmd_bench(cfg).csv;
    }
  } catch (const wlauth::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
