// orthoklein: experiments on Schottky groups acting on the quadric Q3
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "orthoklein/io.hpp"

using namespace orthoklein;
using io::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kSchema = 2, kInsufficient = 3, kDegenerate = 4, kCertificate = 5, kNumerical = 6 };

int exit_code(Errc c) {
  switch (c) {
    case Errc::Schema:
    case Errc::NotUnimodular:
    case Errc::MissingSchottkyData:
    case Errc::NotOnQuadric: return kSchema;
    case Errc::TooShort: return kInsufficient;
    case Errc::NoLoxodromic:
    case Errc::NoDivergentWords: return kDegenerate;
    case Errc::NoConvergence:
    case Errc::NotConvergentFrame: return kNumerical;
    default: return kInternal;
  }
}

struct Context {
  std::string command;
  io::ExperimentConfig cfg;
  std::string configHash;
  std::string outDir;
  bool timings = false;
  std::vector<std::pair<std::string, double>> stages;

  const GroupSpec& group() const {
    if (!cfg.group) throw Error(Errc::Schema, "config has no group");
    return *cfg.group;
  }
  std::string path(const std::string& name) const { return (std::filesystem::path(outDir) / name).string(); }

  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    stages.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return r;
  }
};

json params_json(const io::Params& p) {
  return {{"maxLen", p.maxLen},   {"tol", p.tol},         {"seed", p.seed},         {"threads", p.threads},
          {"dedupEps", p.dedupEps}, {"radius", p.radius}, {"samples", p.samples},   {"eps", p.eps},
          {"limitLen", p.limitLen}, {"deformations", p.deformations.size()}};
}

json words_json(const std::vector<Word>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back(word_string(w));
  return a;
}

// ---- commands

json cmd_classify(Context& ctx) {
  if (!ctx.cfg.sequence) throw Error(Errc::Schema, "config has no sequence");
  const SequenceSpec& seq = *ctx.cfg.sequence;
  const DistortionClass c = ctx.timed("classify", [&] { return classify(seq); });
  json r = io::to_json(c);
  json tail = json::array();
  const auto prefix = seq.kind == SequenceSpec::Kind::Explicit ? seq.elements : seq.prefix(16);
  for (std::size_t k = prefix.size() > 8 ? prefix.size() - 8 : 0; k < prefix.size(); ++k) {
    const CartanData d = cartan_kak(prefix[k]);
    tail.push_back({{"n", k + 1}, {"lambda", d.lambda}, {"mu", d.mu}, {"flip", d.flip}});
  }
  r["cartanTail"] = tail;
  if (c.tag == DistortionTag::Balanced || c.tag == DistortionTag::Mixed || c.tag == DistortionTag::Bounded) {
    try {
      const LimitData d = limit_data(seq, c);
      json l{{"deltaPlus", io::to_json(d.deltaPlus)}, {"deltaMinus", io::to_json(d.deltaMinus)}};
      if (d.pPlus) l["pPlus"] = io::to_json(*d.pPlus);
      if (d.pMinus) l["pMinus"] = io::to_json(*d.pMinus);
      l["limitOperator"] = d.limitOp.has_value();
      r["limits"] = l;
    } catch (const Error& e) {
      r["limits"] = {{"error", errc_name(e.code())}, {"message", e.what()}};
    }
  }
  return r;
}

json cmd_limitset(Context& ctx, int& rc) {
  const GroupSpec& g = ctx.group();
  const io::Params& p = ctx.cfg.params;
  const auto pts = ctx.timed("limit_set_cp1", [&] { return limit_points_cp1(g, p.maxLen, p.dedupEps, p.threads); });
  json r{{"cp1Count", pts.size()}};
  std::vector<CP1> cloud;
  for (const auto& x : pts) cloud.push_back(x.point);
  if (!ctx.outDir.empty()) {
    std::vector<io::CsvRow> rows;
    for (const auto& x : pts) {
      const auto cv = io::chart_of(x.point);
      rows.push_back({word_string(x.word), cv.z, cv.chart, 0});
    }
    io::write_csv(ctx.path("limitset_cp1.csv"), rows);
  }
  try {
    FrancesConfig fc;
    fc.threads = p.threads;
    const FrancesLimitSet fr = ctx.timed("frances_limit_set", [&] { return frances_limit_set(g, p.maxLen, fc); });
    std::vector<CP1> bases;
    for (const auto& x : fr.geodesics) bases.push_back(*x.geodesic.base);
    r["frances"] = {{"geodesicCount", fr.geodesics.size()},
                    {"divergentWords", fr.divergentWords},
                    {"boundedWords", fr.boundedWords},
                    {"allVertical", fr.allVertical},
                    {"cloudSize", fr.cloud.size()},
                    {"hausdorffToCp1", hausdorff_cp1(bases, cloud, p.threads)}};
    if (!ctx.outDir.empty()) io::write_q2_ply(ctx.path("limitset_q2.ply"), fr.cloud);
  } catch (const Error& e) {
    if (e.code() != Errc::NoDivergentWords) throw;
    r["frances"] = {{"error", errc_name(e.code())}, {"message", e.what()}};
    rc = kDegenerate;
  }
  return r;
}

json cmd_verify(Context& ctx, int& rc) {
  const GroupSpec& g = ctx.group();
  const PingPongCertificate c1 = ctx.timed("cp1", [&] { return verify_ping_pong_cp1(g, ctx.cfg.params.tol); });
  json r{{"cp1", io::to_json(c1)}};
  PingPongQ3Config qc;
  qc.seed = ctx.cfg.params.seed;
  qc.tol = ctx.cfg.params.tol;
  const PingPongCertificate c3 = ctx.timed("q3", [&] { return verify_ping_pong_q3(g, qc); });
  r["q3"] = io::to_json(c3);
  r["pass"] = c1.pass && c3.pass;
  if (!(c1.pass && c3.pass)) {
    rc = kCertificate;
    const auto& bad = c1.pass ? c3 : c1;
    std::cerr << "certificate failed: " << bad.reason << "\n";
    if (bad.witness) std::cerr << "witness " << io::to_json(*bad.witness).dump() << "\n";
    if (bad.witnessQ3) std::cerr << "witness " << io::to_json(*bad.witnessQ3).dump() << "\n";
  }
  return r;
}

json cmd_properness(Context& ctx) {
  const GroupSpec& g = ctx.group();
  const io::Params& p = ctx.cfg.params;
  const CompactSample K = compact_ball(p.radius, std::max(1, p.samples), p.seed);
  PropernessConfig pc;
  pc.threads = p.threads;
  const PropernessReport rep = ctx.timed("properness", [&] { return properness_sl2_report(g, K, p.maxLen, pc); });
  json r{{"wordCount", rep.wordCount},
         {"deformationNorm", deformation_norm(g)},
         {"returning", words_json(returning_words(rep))},
         {"maxWordLenReturned", rep.maxWordLenReturned},
         {"suspectBounded", words_json(rep.suspectBounded)},
         {"thresholdMargin", rep.thresholdMargin}};
  const QiFit qi = ctx.timed("quasi_isometry", [&] { return quasi_isometry_fit(g, p.maxLen, 1e3, p.threads); });
  r["quasiIsometry"] = {{"ok", qi.ok},
                        {"B", qi.B},
                        {"C", qi.C},
                        {"calibration", qi.calibration},
                        {"violations", words_json(qi.violations)}};
  if (!p.deformations.empty()) {
    for (const auto& d : p.deformations) {
      if (d.size() != static_cast<std::size_t>(g.rank)) throw Error(Errc::Schema, "params.deformations: one matrix per generator");
      for (const auto& m : d)
        if (!is_sl2(m)) throw Error(Errc::Schema, "params.deformations: not in SL(2,C)");
    }
    const UniformityTable t = ctx.timed("uniformity", [&] { return properness_uniformity(g, p.deformations, K, p.maxLen, pc); });
    json rows = json::array();
    for (const auto& row : t.rows)
      rows.push_back({{"deformationNorm", row.deformationNorm}, {"returningCount", row.returningCount}, {"matchesFirst", row.matchesFirst}});
    r["uniformity"] = {{"identical", t.identical}, {"rows", rows}};
  }
  return r;
}

json cmd_orbit(Context& ctx) {
  const GroupSpec& g = ctx.group();
  const io::Params& p = ctx.cfg.params;
  const QuadricPoint base = p.basePoint ? *p.basePoint : embed_sl2(Mat2::identity());
  const auto cloud = ctx.timed("limit_set_cp1", [&] { return limit_set_cp1(g, p.limitLen, p.dedupEps, p.threads); });
  MembershipConfig mc;
  mc.eps = p.eps;
  std::optional<Reduction> baseRed;
  if (g.schottky) baseRed = schottky_reduce(base, g);
  const auto words = enumerate_words(g, p.maxLen, p.threads);
  std::vector<QuadricPoint> orbit;
  std::vector<io::CsvRow> rows;
  std::vector<std::array<double, 3>> ball;
  std::size_t inU = 0, reducedToBase = 0;
  for (const auto& w : words) {
    const QuadricPoint y = act(w.value, base);
    const bool m = u_gamma_membership(y, cloud, mc);
    inU += m;
    if (baseRed) {
      const Reduction r = schottky_reduce(y, g);
      reducedToBase += chordal(r.representative, baseRed->representative) < 1e-8;
    }
    const HPoint d = delta_map(y);
    io::CsvRow row{word_string(w.word), 0.0, 2, m};
    if (d.boundary) {
      const auto cv = io::chart_of(d.at);
      row.z = cv.z;
      row.chart = cv.chart;
    } else {
      row.z = d.x;
    }
    rows.push_back(row);
    ball.push_back(bloch(d));
    orbit.push_back(y);
  }
  json r{{"orbitSize", orbit.size()}, {"inU", inU}, {"baseInU", u_gamma_membership(base, cloud, mc)}};
  if (orbit.size() <= 20000) {
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      bool dup = false;
      for (std::size_t j = 0; j < i && !dup; ++j) dup = chordal(orbit[i], orbit[j]) < 1e-9;
      distinct += !dup;
    }
    r["distinct"] = distinct;
  } else {
    r["distinct"] = nullptr;
  }
  if (baseRed) {
    r["baseReduction"] = {{"word", word_string(baseRed->word)}, {"representative", io::to_json(baseRed->representative)}};
    r["reducedToBase"] = reducedToBase;
  }
  if (!ctx.outDir.empty()) {
    io::write_csv(ctx.path("orbit.csv"), rows);
    io::write_ball_ply(ctx.path("orbit.ply"), ball);
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schottky groups acting on the quadric Q3 through SL(2,C) x SL(2,C)"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string configPath, outDir;
  std::uint64_t seed = 0;
  int maxLen = 0;
  double tol = 0;
  unsigned threads = 0;
  bool timings = false;
  app.add_option("--config", configPath, "JSON config")->required();
  app.add_option("--out", outDir, "directory for report.json and exported clouds");
  auto* oSeed = app.add_option("--seed", seed, "RNG seed");
  auto* oLen = app.add_option("--max-len", maxLen, "word length bound")->check(CLI::NonNegativeNumber);
  auto* oTol = app.add_option("--tol", tol, "tolerance")->check(CLI::PositiveNumber);
  auto* oThreads = app.add_option("--threads", threads, "worker threads, 0 for all cores");
  app.add_flag("--timings", timings, "add wall-clock timings to the report");
  const std::pair<const char*, const char*> subs[] = {
      {"classify", "distortion class and limit geodesics of a sequence"},
      {"limitset", "CP1 limit set and limit geodesics on Q2"},
      {"verify", "ping-pong certificates on CP1 and Q3"},
      {"properness", "returning words over a compact ball, QI fit"},
      {"orbit", "orbit of a base point, membership and reduction"},
  };
  for (const auto& [name, desc] : subs) app.add_subcommand(name, desc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kSchema;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.outDir = outDir;
  ctx.timings = timings;
  int rc = kOk;
  json report;
  try {
    std::ifstream f(configPath, std::ios::binary);
    if (!f) throw Error(Errc::Schema, "cannot read " + configPath);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    ctx.cfg = io::parse_config(text);
    io::Params& p = ctx.cfg.params;
    if (oSeed->count()) p.seed = seed;
    if (oLen->count()) p.maxLen = maxLen;
    if (oTol->count()) p.tol = tol;
    if (oThreads->count()) {
      p.threads = threads;
    } else if (const char* env = std::getenv("ORTHOKLEIN_THREADS")) {
      p.threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    ctx.configHash = io::hex64(io::fnv1a(text));
    if (!outDir.empty()) std::filesystem::create_directories(outDir);

    json result;
    if (ctx.command == "classify") result = cmd_classify(ctx);
    if (ctx.command == "limitset") result = cmd_limitset(ctx, rc);
    if (ctx.command == "verify") result = cmd_verify(ctx, rc);
    if (ctx.command == "properness") result = cmd_properness(ctx);
    if (ctx.command == "orbit") result = cmd_orbit(ctx);

    // threads do not change results, keep them out of the echo
    json echo = params_json(p);
    echo.erase("threads");
    report = {{"command", ctx.command}, {"version", io::kVersion}, {"configHash", ctx.configHash}, {"params", echo}, {"result", result}};
    if (ctx.timings) {
      json t = json::object();
      for (const auto& [k, v] : ctx.stages) t[k] = v;
      report["timings"] = t;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }

  const std::string out = report.dump(2) + "\n";
  std::cout << out;
  if (!outDir.empty()) {
    std::ofstream f(ctx.path("report.json"), std::ios::binary);
    f << out;
  }
  return rc;
}
