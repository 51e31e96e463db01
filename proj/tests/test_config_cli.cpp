#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "wlauth/cli.hpp"

using namespace wlauth;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string field(const std::string& line, std::size_t index) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < index; ++i) start = line.find(',', start) + 1;
  return line.substr(start, line.find(',', start) - start);
}

Bytes random_input(std::uint64_t seed, std::size_t size) {
  std::mt19937_64 rng(seed);
  return oracle::random_bytes(rng, size);
}

std::string expect_config_error(const std::string& text) {
  try {
    RunConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

struct Verified {
  int code;
  std::string out;
  std::string err;
};

Verified verify(ByteView archive, const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = cli::cmd_verify(archive, cfg, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(RunConfig, Defaults) {
  const auto cfg = RunConfig::parse("");
  EXPECT_EQ(cfg.model.n, 1024u);
  EXPECT_EQ(cfg.model.len_pac_bits, 32768u);
  EXPECT_EQ(cfg.sig_len_bits, 1256u);
  EXPECT_FALSE(cfg.digest_spec().is_keyed());
  EXPECT_FALSE(cfg.topology.is_clustered());
  EXPECT_EQ(cfg.topology.processor_count(), 1u);
}

TEST(RunConfig, ParsesEveryNamedKey) {
  const auto cfg = RunConfig::parse(R"(
# comment line
len_pac_bits = 2K
n = 64
inlen_umac_bits = 256
outlen_umac_bits = 64
th_umac_bps = 1e9
th_sig_per_sec = 1000.5
sig_len_bits = 384
digest_key_hex = 00ff
sig_key_hex = abcd
topology = cluster
m = 3
k = 4
sync_coeff_s = 0.000002
c0 = 0.1
c1 = 0.2
g0 = 0.3
g1 = 0.4
a0 = 0.5   # trailing comment
p_loss = 0.25
pollution_rate = 0.5
seed = 99
)");
  EXPECT_EQ(cfg.model.len_pac_bits, 2048u);
  EXPECT_EQ(cfg.model.n, 64u);
  EXPECT_EQ(cfg.model.inlen_umac_bits, 256u);
  EXPECT_EQ(cfg.digest_spec().out_len_bits(), 64u);
  EXPECT_EQ(cfg.model.th_umac_bps, Rational(1000000000));
  EXPECT_EQ(cfg.model.th_sig_per_sec, Rational(2001, 2));
  EXPECT_EQ(cfg.sig_len_bits, 384u);
  EXPECT_EQ(cfg.digest_key, (Bytes{0x00, 0xff}));
  EXPECT_TRUE(cfg.digest_spec().is_keyed());
  EXPECT_EQ(cfg.sig_key, (Bytes{0xab, 0xcd}));
  EXPECT_EQ(cfg.topology.cluster_count(), 3u);
  EXPECT_EQ(cfg.topology.cluster_size(), 4u);
  EXPECT_EQ(cfg.sync_coeff_s, Rational(1, 500000));
  EXPECT_EQ(cfg.model.overhead.total(0, 0), Rational(1, 10) + Rational(3, 10) + Rational(5, 10));
  EXPECT_EQ(cfg.model.overhead.c1, Rational(2, 10));
  EXPECT_EQ(cfg.model.overhead.g1, Rational(4, 10));
  EXPECT_EQ(cfg.channel.p_loss, 0.25);
  EXPECT_EQ(cfg.channel.seed, 99u);
  EXPECT_EQ(cfg.attack.pollution_rate, 0.5);
}

TEST(RunConfig, SchemePresets) {
  const auto ecc = RunConfig::parse("sig_scheme = ecc");
  EXPECT_EQ(ecc.model.th_sig_per_sec, 5140);
  EXPECT_EQ(ecc.sig_len_bits, 384u);
  const auto overridden = RunConfig::parse("sig_len_bits = 512\nsig_scheme = ecc");
  EXPECT_EQ(overridden.sig_len_bits, 512u);
}

TEST(RunConfig, ErrorsNameTheOffendingKey) {
  EXPECT_EQ(expect_config_error("bogus = 1"), "bogus");
  EXPECT_EQ(expect_config_error("n = 8\nn = 16"), "n");
  EXPECT_EQ(expect_config_error("n = 12"), "n");
  EXPECT_EQ(expect_config_error("n = -4"), "n");
  EXPECT_EQ(expect_config_error("M = 0"), "M");
  EXPECT_EQ(expect_config_error("topology = cluster\nk = 3"), "k");
  EXPECT_EQ(expect_config_error("topology = ring"), "topology");
  EXPECT_EQ(expect_config_error("p_loss = 1.5"), "p_loss");
  EXPECT_EQ(expect_config_error("pollution_rate = x"), "pollution_rate");
  EXPECT_EQ(expect_config_error("digest_key_hex = 0g"), "digest_key_hex");
  EXPECT_EQ(expect_config_error("outlen_umac_bits = 12"), "outlen_umac_bits");
  EXPECT_EQ(expect_config_error("sig_len_bits = 7"), "sig_len_bits");
  EXPECT_EQ(expect_config_error("th_umac_bps = 0"), "th_umac_bps");
  EXPECT_EQ(expect_config_error("c0 = -0.1"), "c0");
  EXPECT_EQ(expect_config_error("len_pac_bits = 12"), "len_pac_bits");
  EXPECT_EQ(expect_config_error("seed"), "line 1");
}

namespace {

RunConfig small_config(const std::string& extra = "") {
  return RunConfig::parse("len_pac_bits = 256\nn = 64\ndigest_key_hex = 0102\nsig_key_hex = 0304\n" + extra);
}

}  // namespace

TEST(CmdSign, OneBlockVerifies) {
  const auto cfg = small_config();
  const Bytes input = random_input(1, 64 * 32);
  const Bytes archive = cli::cmd_sign(input, cfg);
  const auto entries = read_archive(archive, cfg.digest_spec());
  ASSERT_EQ(entries.size(), 64u);
  for (const auto& e : entries) EXPECT_EQ(verify_packet(e.packet, cfg.digest_spec(), cfg.signature_spec()), Verdict::accept);
}

TEST(CmdSign, PartialBlockRejected) {
  try {
    cli::cmd_sign(random_input(2, 64 * 32 + 1), small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::partial_block_unsupported);
  }
}

TEST(CmdSign, TopologyDoesNotChangeBytes) {
  const Bytes input = random_input(3, 8 * 64 * 32);
  const Bytes one = cli::cmd_sign(input, small_config("M = 1"));
  EXPECT_EQ(cli::cmd_sign(input, small_config("M = 4")), one);
  EXPECT_EQ(cli::cmd_sign(input, small_config("topology = cluster\nm = 2\nk = 2")), one);
}

TEST(CmdSign, ArchiveSizeIsInputPlusOverhead) {
  const auto cfg = RunConfig::parse("len_pac_bits = 512\nn = 1024");
  const std::size_t groups = 2;
  const Bytes input = random_input(4, groups * 1024 * 64);
  const Bytes archive = cli::cmd_sign(input, cfg);
  EXPECT_EQ(archive.size() * 8, input.size() * 8 + groups * 1024 * (kPacketHeaderBytes * 8 + 1576));
}

TEST(CmdVerify, FreshArchiveExitsZero) {
  const auto cfg = small_config();
  const auto v = verify(cli::cmd_sign(random_input(5, 2 * 64 * 32), cfg), cfg);
  EXPECT_EQ(v.code, 0);
  const auto rows = lines_of(v.out);
  ASSERT_EQ(rows.size(), 129u);
  EXPECT_EQ(rows[0], "offset,block_id,packet_index,verdict");
  EXPECT_EQ(rows[1], "0,0,0,Accept");
  EXPECT_EQ(field(rows[128], 1), "1");
  EXPECT_EQ(field(rows[128], 2), "63");
}

TEST(CmdVerify, OneFlippedPayloadByteGivesOneReject) {
  const auto cfg = small_config();
  Bytes archive = cli::cmd_sign(random_input(6, 2 * 64 * 32), cfg);
  const std::size_t frame = archive.size() / 128;
  archive[37 * frame + kPayloadOffset + 5] ^= 0x10;
  const auto v = verify(archive, cfg);
  EXPECT_EQ(v.code, 1);
  std::size_t rejects = 0;
  for (const auto& row : lines_of(v.out)) {
    if (row.find(",Reject") != std::string::npos) {
      ++rejects;
      EXPECT_EQ(field(row, 0), std::to_string(37 * frame));
      EXPECT_EQ(field(row, 2), "37");
    }
  }
  EXPECT_EQ(rejects, 1u);
}

TEST(CmdVerify, TruncatedArchiveExitsTwoWithOffset) {
  const auto cfg = small_config();
  Bytes archive = cli::cmd_sign(random_input(7, 64 * 32), cfg);
  archive.resize(archive.size() - 10);
  const auto v = verify(archive, cfg);
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.err.find("offset"), std::string::npos) << v.err;
}

TEST(CmdVerify, WrongDigestLengthExitsTwo) {
  const Bytes archive = cli::cmd_sign(random_input(8, 64 * 32), small_config());
  EXPECT_EQ(verify(archive, small_config("outlen_umac_bits = 64")).code, 2);
}

TEST(CmdVerify, WrongKeyRejectsEveryPacket) {
  const Bytes archive = cli::cmd_sign(random_input(9, 64 * 32), small_config());
  const auto cfg = RunConfig::parse("len_pac_bits = 256\nn = 64\ndigest_key_hex = 0102\nsig_key_hex = 0305");
  const auto v = verify(archive, cfg);
  EXPECT_EQ(v.code, 1);
  EXPECT_EQ(std::count(v.out.begin(), v.out.end(), '\n'), 65);
  EXPECT_EQ(v.out.find("Accept"), std::string::npos);
}

TEST(CmdModel, NtruProcessorSweep) {
  const auto rows = lines_of(cli::cmd_model(RunConfig::parse(""), {.sweep = "M=1..32"}));
  ASSERT_EQ(rows.size(), 33u);
  EXPECT_EQ(rows[0], kSweepCsvHeader);
  EXPECT_EQ(field(rows[8], 5), "8");
  EXPECT_EQ(field(rows[8], 3), "96");
  EXPECT_EQ(field(rows[8], 13), "8.000000");
}

TEST(CmdModel, EccSameGroupsSmallerSequentialTime) {
  const auto ntru = lines_of(cli::cmd_model(RunConfig::parse("sig_scheme = ntru"), {}));
  const auto ecc = lines_of(cli::cmd_model(RunConfig::parse("sig_scheme = ecc"), {}));
  ASSERT_EQ(ntru.size(), 2u);
  ASSERT_EQ(ecc.size(), 2u);
  EXPECT_EQ(field(ntru[1], 3), field(ecc[1], 3));
  EXPECT_EQ(field(ecc[1], 8), "ecc");
  EXPECT_LT(std::stod(field(ecc[1], 9)), std::stod(field(ntru[1], 9)));
}

TEST(CmdModel, EmptyRangesGiveHeaderOnly) {
  const auto cfg = RunConfig::parse("");
  EXPECT_EQ(cli::cmd_model(cfg, {.sweep = ""}), std::string(kSweepCsvHeader) + "\n");
  EXPECT_EQ(cli::cmd_model(cfg, {.sweep = "M=5..4"}), std::string(kSweepCsvHeader) + "\n");
  EXPECT_EQ(cli::cmd_model(cfg, {.topology = "cluster", .m_range = "", .k_range = "2"}),
            std::string(kSweepCsvHeader) + "\n");
}

TEST(CmdModel, ClusterGrid) {
  const auto rows = lines_of(cli::cmd_model(RunConfig::parse(""), {.topology = "cluster", .m_range = "1..4", .k_range = "1,2,4"}));
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(field(rows[1], 4), "cluster");
  EXPECT_EQ(field(rows[12], 5), "16");
}

TEST(CmdModel, MultipleMessageSizes) {
  const auto rows = lines_of(cli::cmd_model(RunConfig::parse("message_bits = 1.5G, 3G, 5.5G"), {.sweep = "M=4"}));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(field(rows[1], 3), "48");
  EXPECT_EQ(field(rows[2], 3), "96");
  EXPECT_EQ(field(rows[3], 3), "176");
}

TEST(CmdModel, BadArguments) {
  const auto cfg = RunConfig::parse("");
  EXPECT_THROW(cli::cmd_model(cfg, {.sweep = "P=1..4"}), ConfigError);
  EXPECT_THROW(cli::cmd_model(cfg, {.sweep = "M=0..4"}), ConfigError);
  EXPECT_THROW(cli::cmd_model(cfg, {.topology = "ring"}), ConfigError);
  EXPECT_THROW(cli::cmd_model(RunConfig::parse("message_bits = 1000"), {}), Error);
}

namespace {

std::string simulate(const Bytes& archive, const std::string& extra) {
  return cli::cmd_simulate(archive, small_config(extra));
}

}  // namespace

TEST(CmdSimulate, CleanChannelAcceptsEverything) {
  const Bytes archive = cli::cmd_sign(random_input(10, 4 * 64 * 32), small_config());
  const auto rows = lines_of(simulate(archive, ""));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].rfind("# generator:", 0), 0u);
  EXPECT_EQ(rows[1], kDeliveryCsvHeader);
  EXPECT_EQ(field(rows[2], 4), "256");
  EXPECT_EQ(field(rows[2], 8), "256");
}

TEST(CmdSimulate, SeededRunsRepeat) {
  const Bytes archive = cli::cmd_sign(random_input(11, 4 * 64 * 32), small_config());
  const std::string a = simulate(archive, "p_loss = 0.3\nseed = 42");
  EXPECT_EQ(a, simulate(archive, "p_loss = 0.3\nseed = 42"));
  EXPECT_NE(a, simulate(archive, "p_loss = 0.3\nseed = 43"));
  const auto rows = lines_of(a);
  EXPECT_EQ(field(rows[2], 5), field(rows[2], 8));
}

TEST(CmdSimulate, FullPollutionRejectsAllDelivered) {
  const Bytes archive = cli::cmd_sign(random_input(12, 4 * 64 * 32), small_config());
  for (const char* mode : {"flip", "payload", "signature"}) {
    const auto rows = lines_of(simulate(archive, std::string("pollution_rate = 1\np_loss = 0.2\nattack_mode = ") + mode));
    EXPECT_EQ(field(rows[2], 9), field(rows[2], 5)) << mode;
    EXPECT_EQ(field(rows[2], 10), "0") << mode;
  }
}

TEST(CmdSimulate, BurstChannel) {
  const Bytes archive = cli::cmd_sign(random_input(13, 4 * 64 * 32), small_config());
  const auto rows = lines_of(simulate(archive, "channel = burst\np_enter_bad = 0.1\np_exit_bad = 0.3\nseed = 5"));
  EXPECT_EQ(field(rows[2], 1), "burst");
  EXPECT_EQ(field(rows[2], 5), field(rows[2], 8));
  EXPECT_NE(field(rows[2], 6), "0");
}

namespace {

double median_bench_speedup(const RunConfig& cfg) {
  std::vector<double> runs;
  for (int i = 0; i < 7; ++i) runs.push_back(*cli::cmd_bench(cfg).report.measured_speedup);
  std::sort(runs.begin(), runs.end());
  return runs[runs.size() / 2];
}

}  // namespace

TEST(CmdBench, SingleWorkerMatchesReference) {
  const auto cfg = RunConfig::parse("n = 256\nlen_pac_bits = 8K\nG = 16");
  const double speedup = median_bench_speedup(cfg);
  EXPECT_GE(speedup, 0.9);
  EXPECT_LE(speedup, 1.1);
}

TEST(CmdBench, ModelColumnEqualsPerfModel) {
  const auto mps = RunConfig::parse("n = 64\nlen_pac_bits = 512\nG = 10\nM = 4");
  const auto bench = cli::cmd_bench(mps);
  EXPECT_EQ(bench.model_speedup, to_double(parallel_time_mps(mps.model, 10, 4).speedup));
  const auto rows = lines_of(bench.csv);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], cli::kEngineCsvHeader);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(field(rows[i], 0), std::to_string(i - 1));
    EXPECT_EQ(field(rows[i], 6), format_fixed6(bench.model_speedup));
  }
  EXPECT_EQ(field(rows[1], 1), "3");
  EXPECT_EQ(field(rows[4], 1), "2");

  const auto cl = RunConfig::parse("n = 64\nlen_pac_bits = 512\nG = 9\ntopology = cluster\nm = 2\nk = 2\nsync_coeff_s = 0.001");
  const auto cbench = cli::cmd_bench(cl);
  EXPECT_EQ(cbench.model_speedup, to_double(parallel_time_cluster(cl.model, 9, 2, 2, 0).speedup));
  EXPECT_EQ(cbench.report.workers.size(), 4u);
}

// Property: sign then verify succeeds for randomized valid configurations.
TEST(SignVerify, RandomizedConfigsRoundTrip) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint64_t n = std::uint64_t{2} << (trial % 10);
    const std::uint64_t len_bytes = 1 + rng() % 16;
    const std::uint64_t groups = 1 + rng() % 3;
    std::string text = "n = " + std::to_string(n) + "\nlen_pac_bits = " + std::to_string(len_bytes * 8) +
                       "\noutlen_umac_bits = " + std::to_string(8 * (1 + rng() % 32)) +
                       "\nsig_len_bits = " + std::to_string(8 * (1 + rng() % 200));
    if (rng() % 2) text += "\ndigest_key_hex = " + to_hex(oracle::random_bytes(rng, 1 + rng() % 32));
    if (rng() % 2) text += "\nsig_key_hex = " + to_hex(oracle::random_bytes(rng, 1 + rng() % 32));
    switch (rng() % 3) {
      case 0: text += "\nM = " + std::to_string(1 + rng() % 5); break;
      case 1: text += "\ntopology = cluster\nm = " + std::to_string(1 + rng() % 3) + "\nk = 2"; break;
      default: break;
    }
    const auto cfg = RunConfig::parse(text);
    const Bytes archive = cli::cmd_sign(random_input(trial, groups * n * len_bytes), cfg);
    const auto v = verify(archive, cfg);
    ASSERT_EQ(v.code, 0) << text;
    ASSERT_EQ(lines_of(v.out).size(), groups * n + 1) << text;
  }
}
