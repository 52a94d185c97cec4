#pragma once

#include "rkwave/kwave.hpp"
#include "rkwave/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rkwave::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Wrapper enforcing the published schemas: typed getters, required keys,
/// and rejection of unknown keys, all reporting the JSON pointer of the
/// offending key via ConfigError.
class Checker {
 public:
  Checker(const json& node, std::string pointer);

  const json& raw() const { return node_; }
  const std::string& pointer() const { return pointer_; }

  /// Every key must appear in one of the two lists; `required` must all be
  /// present.
  void keys(const std::vector<std::string>& required,
            const std::vector<std::string>& optional = {}) const;

  bool has(const std::string& key) const { return node_.contains(key); }
  Checker child(const std::string& key) const;
  Checker element(std::size_t i) const;
  std::size_t array_size() const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int fallback) const;
  bool boolean(const std::string& key) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  Vec vector(const std::string& key) const;
  std::vector<double> number_array(const std::string& key) const;
  std::vector<int> integer_array(const std::string& key) const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const json& node_;
  std::string pointer_;
};

json load_json_file(const std::filesystem::path& path);

// --- profiles -------------------------------------------------------------
kwave::ImplicitProfile profile_from_json(const Checker& c, int k);
json profile_to_json(const kwave::ImplicitProfile& p);
std::vector<kwave::ImplicitProfile> profiles_from_json(const json& root, int k);
json profiles_to_json(const std::vector<kwave::ImplicitProfile>& profiles);

// --- grids ----------------------------------------------------------------
json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const Checker& c);

// --- solutions ------------------------------------------------------------
json solution_to_json(const kwave::KWaveSolution& s);
kwave::KWaveSolution solution_from_json(const json& root);

// --- reports --------------------------------------------------------------
json verification_to_json(const verify::VerificationReport& rep);
json involutivity_to_json(const geometry::InvolutivityReport& rep);
json catastrophes_to_json(const kwave::CatastropheReport& rep);
json lambda_constraints_to_json(const kwave::LambdaConstraintReport& rep);

// --- field table ----------------------------------------------------------
std::string field_table_csv(const kwave::FieldTable& table, int k, int q);
std::string gnuplot_script(const std::string& csv_name, const kwave::FieldTable& table, int k,
                           int q);

// --- filesystem -----------------------------------------------------------
/// Write via temp file + rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// %.17g formatting used for every CSV number (round-trip exact).
std::string format_double(double v);

}  // namespace rkwave::io
