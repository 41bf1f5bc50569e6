#include "rankcal/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rankcal/errors.hpp"

namespace rankcal {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw InvalidInput("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidInput("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw InvalidInput("config: " + key + " expects a boolean, got '" + v + "'");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* pairing_tag(Pairing pairing) {
  switch (pairing) {
    case Pairing::fer_fr: return "fer_fr";
    case Pairing::fer_fer: return "fer_fer";
    case Pairing::both: return "both";
  }
  return "";
}

const char* rank_mode_tag(RankMode mode) { return mode == RankMode::label_indexed ? "label_indexed" : "top1"; }

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidInput("config: lr must be positive");
  if (batch == 0) throw InvalidInput("config: batch must be positive");
  if (!(delta >= 0.0)) throw InvalidInput("config: delta must be non-negative");
  if (!(w_rank >= 0.0)) throw InvalidInput("config: w_rank must be non-negative");
  if (bins == 0) throw InvalidInput("config: bins must be positive");
  if (hidden_dim == 0) throw InvalidInput("config: hidden_dim must be positive");
  if (fr_ratio == 0) throw InvalidInput("config: fr_ratio must be positive");
  focal.validate();
  pseudo.validate();
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "lr") c.lr = to_double(key, value);
  else if (key == "batch") c.batch = to_uint(key, value);
  else if (key == "epochs") c.epochs = to_uint(key, value);
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "w_rank") c.w_rank = to_double(key, value);
  else if (key == "gamma") c.focal.gamma = to_double(key, value);
  else if (key == "alpha") c.focal.alpha = to_double(key, value);
  else if (key == "beta") c.pseudo.beta = to_double(key, value);
  else if (key == "tau0") c.pseudo.tau0 = to_double(key, value);
  else if (key == "lambda_c") {
    c.pseudo.lambda_c.clear();
    std::istringstream in(value);
    for (std::string part; std::getline(in, part, ',');) c.pseudo.lambda_c.push_back(to_double(key, trim(part)));
  } else if (key == "pairing") {
    if (value == "fer_fr") c.pairing = Pairing::fer_fr;
    else if (value == "fer_fer") c.pairing = Pairing::fer_fer;
    else if (value == "both") c.pairing = Pairing::both;
    else throw InvalidInput("config: pairing must be fer_fr, fer_fer or both");
  } else if (key == "seed") c.seed = to_uint(key, value);
  else if (key == "bins") c.bins = to_uint(key, value);
  else if (key == "hidden_dim") c.hidden_dim = to_uint(key, value);
  else if (key == "rank_mode") {
    if (value == "label_indexed") c.rank_mode = RankMode::label_indexed;
    else if (value == "top1") c.rank_mode = RankMode::top1;
    else throw InvalidInput("config: rank_mode must be label_indexed or top1");
  } else if (key == "syn_focal") c.syn_focal = to_bool(key, value);
  else if (key == "fr_focal") c.fr_focal = to_bool(key, value);
  else if (key == "augment_fer") c.augment_fer = to_bool(key, value);
  else if (key == "fr_ratio") c.fr_ratio = to_uint(key, value);
  else throw InvalidInput("config: unknown key '" + key + "'");
}

TrainConfig parse_config(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const TrainConfig& c) {
  std::string lambdas;
  for (std::size_t i = 0; i < c.pseudo.lambda_c.size(); ++i) {
    if (i) lambdas += ',';
    lambdas += num(c.pseudo.lambda_c[i]);
  }
  std::ostringstream os;
  os << "lr = " << num(c.lr) << '\n'
     << "batch = " << c.batch << '\n'
     << "epochs = " << c.epochs << '\n'
     << "delta = " << num(c.delta) << '\n'
     << "w_rank = " << num(c.w_rank) << '\n'
     << "gamma = " << num(c.focal.gamma) << '\n'
     << "alpha = " << num(c.focal.alpha) << '\n'
     << "beta = " << num(c.pseudo.beta) << '\n'
     << "tau0 = " << num(c.pseudo.tau0) << '\n'
     << "lambda_c = " << lambdas << '\n'
     << "pairing = " << pairing_tag(c.pairing) << '\n'
     << "seed = " << c.seed << '\n'
     << "bins = " << c.bins << '\n'
     << "hidden_dim = " << c.hidden_dim << '\n'
     << "rank_mode = " << rank_mode_tag(c.rank_mode) << '\n'
     << "syn_focal = " << (c.syn_focal ? "true" : "false") << '\n'
     << "fr_focal = " << (c.fr_focal ? "true" : "false") << '\n'
     << "augment_fer = " << (c.augment_fer ? "true" : "false") << '\n'
     << "fr_ratio = " << c.fr_ratio << '\n';
  return os.str();
}

}  // namespace rankcal
