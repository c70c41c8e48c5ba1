#include "khaos/archive.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace khaos {

using nlohmann::json;

Eigen::MatrixXd InputScaling::apply(const Eigen::MatrixXd& raw,
                                    long* clamped) const {
  if (raw.cols() != min.size())
    throw std::invalid_argument("InputScaling: column count mismatch");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  long n_clamped = 0;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double lo = min[j];
    const double span = max[j] - lo;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      double v = (raw(i, j) - lo) / span;
      if (v < 0.0 || v > 1.0) {
        ++n_clamped;
        v = std::min(1.0, std::max(0.0, v));
      }
      out(i, j) = v;
    }
  }
  if (clamped) *clamped = n_clamped;
  return out;
}

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

class ByteWriter {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* b = reinterpret_cast<const unsigned char*>(&v);
    bytes_.insert(bytes_.end(), b, b + sizeof(T));
  }
  void put_vec(const Eigen::VectorXd& v) {
    put(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put(v[i]);
  }
  void put_mat(const Eigen::MatrixXd& m) {
    put(static_cast<std::uint64_t>(m.rows()));
    put(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) put(m(i, j));
  }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes)
      : bytes_(std::move(bytes)) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size())
      throw std::invalid_argument("archive payload truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  Eigen::VectorXd get_vec() {
    const auto n = get<std::uint64_t>();
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get<double>();
    return v;
  }
  Eigen::MatrixXd get_mat() {
    const auto r = get<std::uint64_t>();
    const auto c = get<std::uint64_t>();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(c));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = get<double>();
    return m;
  }

 private:
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

json prior_to_json(const PriorSpec& p) {
  json j;
  j["family"] = to_string(p.family);
  j["a_M"] = p.a_M;
  j["b_M"] = p.b_M;
  j["a_sigma"] = p.a_sigma;
  j["b_sigma"] = p.b_sigma;
  j["a_g"] = p.a_g;
  j["b_g"] = p.b_g;
  j["zeta"] = p.zeta;
  j["tau2"] = p.tau2;
  j["d_max"] = p.d_max;
  j["q_max"] = p.q_max;
  j["s_q"] = p.s_q;
  j["s_d"] = p.s_d;
  j["exact_sigma_conditional"] = p.exact_sigma_conditional;
  if (p.fixed_sigma2) j["fixed_sigma2"] = *p.fixed_sigma2;
  return j;
}

PriorSpec prior_from_json(const json& j) {
  PriorSpec p;
  p.family = prior_family_from_string(j.at("family").get<std::string>());
  p.a_M = j.at("a_M").get<double>();
  p.b_M = j.at("b_M").get<double>();
  p.a_sigma = j.at("a_sigma").get<double>();
  p.b_sigma = j.at("b_sigma").get<double>();
  p.a_g = j.at("a_g").get<double>();
  p.b_g = j.at("b_g").get<double>();
  p.zeta = j.at("zeta").get<double>();
  p.tau2 = j.at("tau2").get<double>();
  p.d_max = j.at("d_max").get<int>();
  p.q_max = j.at("q_max").get<int>();
  p.s_q = j.at("s_q").get<double>();
  p.s_d = j.at("s_d").get<double>();
  p.exact_sigma_conditional = j.at("exact_sigma_conditional").get<bool>();
  if (j.contains("fixed_sigma2"))
    p.fixed_sigma2 = j.at("fixed_sigma2").get<double>();
  return p;
}

json config_to_json(const SamplerConfig& c) {
  json j;
  j["n_iter"] = c.n_iter;
  j["n_burn"] = c.n_burn;
  j["n_thin"] = c.n_thin;
  j["p_birth"] = c.p_birth;
  j["p_death"] = c.p_death;
  j["m_max"] = c.m_max;
  j["delayed_rejection_cap"] = c.delayed_rejection_cap;
  j["adapt_interval"] = c.adapt_interval;
  j["seed"] = c.seed;
  return j;
}

SamplerConfig config_from_json(const json& j) {
  SamplerConfig c;
  c.n_iter = j.at("n_iter").get<int>();
  c.n_burn = j.at("n_burn").get<int>();
  c.n_thin = j.at("n_thin").get<int>();
  c.p_birth = j.at("p_birth").get<double>();
  c.p_death = j.at("p_death").get<double>();
  c.m_max = j.at("m_max").get<int>();
  c.delayed_rejection_cap = j.at("delayed_rejection_cap").get<int>();
  c.adapt_interval = j.at("adapt_interval").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<unsigned char> draws_payload(const PosteriorDraws& draws) {
  ByteWriter w;
  w.put(static_cast<std::uint64_t>(draws.draws.size()));
  w.put(static_cast<std::uint32_t>(draws.p));
  for (const auto& d : draws.draws) {
    w.put(static_cast<std::uint32_t>(d.terms.size()));
    for (const auto& t : d.terms) {
      for (int j = 0; j < t.dim(); ++j)
        w.put(static_cast<std::uint16_t>(t[j]));
    }
    w.put_vec(d.beta);
    w.put(d.sigma2);
    w.put(d.g0sq);
    w.put(d.lambda);
  }
  return w.bytes();
}

void draws_from_payload(ByteReader& r, PosteriorDraws& draws) {
  const auto nd = r.get<std::uint64_t>();
  const auto p = r.get<std::uint32_t>();
  draws.p = static_cast<int>(p);
  draws.draws.clear();
  draws.draws.reserve(nd);
  for (std::uint64_t k = 0; k < nd; ++k) {
    Draw d;
    const auto m = r.get<std::uint32_t>();
    d.terms.reserve(m);
    for (std::uint32_t t = 0; t < m; ++t) {
      std::vector<int> degrees(p);
      for (std::uint32_t j = 0; j < p; ++j)
        degrees[j] = static_cast<int>(r.get<std::uint16_t>());
      d.terms.emplace_back(std::move(degrees));
    }
    d.beta = r.get_vec();
    d.sigma2 = r.get<double>();
    d.g0sq = r.get<double>();
    d.lambda = r.get<double>();
    draws.draws.push_back(std::move(d));
  }
}

json posterior_to_json(const PosteriorDraws& draws) {
  json j;
  j["p"] = draws.p;
  j["n_train"] = draws.n_train;
  j["seed"] = draws.seed;
  j["config_hash"] = draws.config_hash;
  j["prior"] = prior_to_json(draws.prior);
  j["config"] = config_to_json(draws.config);
  j["payload"] = base64_encode(draws_payload(draws));
  json stats;
  auto put_counter = [&](const char* name, const MoveCounters& c) {
    stats[name] = {{"proposed", c.proposed},
                   {"accepted", c.accepted},
                   {"abandoned", c.abandoned}};
  };
  put_counter("birth", draws.stats.birth);
  put_counter("death", draws.stats.death);
  put_counter("mutate_degree", draws.stats.mutate_degree);
  put_counter("mutate_variable", draws.stats.mutate_variable);
  put_counter("g0", draws.stats.g0);
  j["stats"] = stats;
  return j;
}

PosteriorDraws posterior_from_json(const json& j) {
  PosteriorDraws draws;
  draws.p = j.at("p").get<int>();
  draws.n_train = j.at("n_train").get<int>();
  draws.seed = j.at("seed").get<std::uint64_t>();
  draws.config_hash = j.at("config_hash").get<std::uint64_t>();
  draws.prior = prior_from_json(j.at("prior"));
  draws.config = config_from_json(j.at("config"));
  ByteReader r(base64_decode(j.at("payload").get<std::string>()));
  draws_from_payload(r, draws);
  auto get_counter = [&](const char* name, MoveCounters& c) {
    const json& s = j.at("stats").at(name);
    c.proposed = s.at("proposed").get<long>();
    c.accepted = s.at("accepted").get<long>();
    c.abandoned = s.at("abandoned").get<long>();
  };
  get_counter("birth", draws.stats.birth);
  get_counter("death", draws.stats.death);
  get_counter("mutate_degree", draws.stats.mutate_degree);
  get_counter("mutate_variable", draws.stats.mutate_variable);
  get_counter("g0", draws.stats.g0);
  return draws;
}

json terms_to_json(const std::vector<MultiIndex>& terms) {
  json arr = json::array();
  for (const auto& t : terms) arr.push_back(t.degrees());
  return arr;
}

std::vector<MultiIndex> terms_from_json(const json& arr) {
  std::vector<MultiIndex> out;
  out.reserve(arr.size());
  for (const auto& t : arr) out.emplace_back(t.get<std::vector<int>>());
  return out;
}

json sparse_to_json(const SparseFit& fit) {
  json j;
  j["p"] = fit.p;
  j["n"] = fit.n;
  j["selected"] = terms_to_json(fit.selected);
  j["score"] = fit.score;
  j["score_path"] = fit.score_path;
  json hist = json::array();
  for (const auto& [d, q] : fit.enrichment_history) hist.push_back({d, q});
  j["enrichment_history"] = hist;
  ByteWriter w;
  w.put_vec(fit.beta_hat);
  w.put_mat(fit.chol_precision);
  w.put(fit.a_n);
  w.put(fit.b_n);
  w.put(fit.sigma2_hat);
  w.put(fit.g0sq_used);
  j["payload"] = base64_encode(w.bytes());
  return j;
}

SparseFit sparse_from_json(const json& j) {
  SparseFit fit;
  fit.p = j.at("p").get<int>();
  fit.n = j.at("n").get<int>();
  fit.selected = terms_from_json(j.at("selected"));
  fit.score = j.at("score").get<double>();
  fit.score_path = j.at("score_path").get<std::vector<double>>();
  for (const auto& pair : j.at("enrichment_history"))
    fit.enrichment_history.emplace_back(pair[0].get<int>(),
                                        pair[1].get<int>());
  ByteReader r(base64_decode(j.at("payload").get<std::string>()));
  fit.beta_hat = r.get_vec();
  fit.chol_precision = r.get_mat();
  fit.a_n = r.get<double>();
  fit.b_n = r.get<double>();
  fit.sigma2_hat = r.get<double>();
  fit.g0sq_used = r.get<double>();
  return fit;
}

json ordinal_to_json(const OrdinalFit& fit) {
  json j;
  j["num_categories"] = fit.num_categories;
  j["draws"] = posterior_to_json(fit.draws);
  ByteWriter w;
  w.put(static_cast<std::uint64_t>(fit.cutpoint_draws.size()));
  for (const auto& c : fit.cutpoint_draws) w.put_vec(c);
  j["cutpoints_payload"] = base64_encode(w.bytes());
  return j;
}

OrdinalFit ordinal_from_json(const json& j) {
  OrdinalFit fit;
  fit.num_categories = j.at("num_categories").get<int>();
  fit.draws = posterior_from_json(j.at("draws"));
  ByteReader r(base64_decode(j.at("cutpoints_payload").get<std::string>()));
  const auto n = r.get<std::uint64_t>();
  fit.cutpoint_draws.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    fit.cutpoint_draws.push_back(r.get_vec());
  return fit;
}

}  // namespace

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
    i += 3;
  }
  const std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    const unsigned v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rem == 2) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw std::invalid_argument("base64: bad character");
  };
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    const int v = value_of(c);
    if (v < 0) break;  // padding
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

void save_archive(const std::string& path, const ModelArchive& archive) {
  json j;
  j["format_version"] = archive.format_version;
  j["method"] = archive.method;
  j["seed"] = archive.seed;
  j["config_hash"] = archive.config_hash;
  json scaling;
  scaling["columns"] = archive.scaling.columns;
  scaling["response"] = archive.scaling.response;
  ByteWriter w;
  w.put_vec(archive.scaling.min);
  w.put_vec(archive.scaling.max);
  scaling["payload"] = base64_encode(w.bytes());
  j["scaling"] = scaling;

  if (archive.draws) j["draws"] = posterior_to_json(*archive.draws);
  if (archive.sparse) j["sparse"] = sparse_to_json(*archive.sparse);
  if (archive.ordinal) j["ordinal"] = ordinal_to_json(*archive.ordinal);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write archive: " + path);
  out << j.dump(1) << "\n";
}

ModelArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open archive: " + path);
  json j;
  in >> j;

  ModelArchive archive;
  archive.format_version = j.at("format_version").get<int>();
  if (archive.format_version != 1)
    throw std::invalid_argument("unsupported archive format version");
  archive.method = j.at("method").get<std::string>();
  archive.seed = j.at("seed").get<std::uint64_t>();
  archive.config_hash = j.at("config_hash").get<std::uint64_t>();
  const json& scaling = j.at("scaling");
  archive.scaling.columns =
      scaling.at("columns").get<std::vector<std::string>>();
  archive.scaling.response = scaling.at("response").get<std::string>();
  ByteReader r(base64_decode(scaling.at("payload").get<std::string>()));
  archive.scaling.min = r.get_vec();
  archive.scaling.max = r.get_vec();

  if (j.contains("draws")) archive.draws = posterior_from_json(j.at("draws"));
  if (j.contains("sparse")) archive.sparse = sparse_from_json(j.at("sparse"));
  if (j.contains("ordinal"))
    archive.ordinal = ordinal_from_json(j.at("ordinal"));
  return archive;
}

}  // namespace khaos
