#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace lbk {

/// Decoding parameters forwarded to the paraphrase model.
struct ParaphraseParams {
  int l_max = 60;
  int l_min = 10;
  double length_penalty = 2.0;
  int num_beams = 4;
};

struct ParaphraseRequest {
  std::string text;
  ParaphraseParams params;
};

/// JSON request body sent to external paraphrase commands.
std::string to_request_json(const ParaphraseRequest& request);

/// Stand-in for the hosted paraphrase model. Implementations throw
/// ProviderUnavailable when the backend cannot be reached and
/// ProviderFailure when it answers badly.
class Paraphraser {
 public:
  virtual ~Paraphraser() = default;
  virtual std::string paraphrase(const ParaphraseRequest& request) = 0;
};

enum class ProviderKind { kFixtureFile, kExternalCommand };

struct ProviderBinding {
  ProviderKind kind;
  std::string locator;

  /// "fixture:<path>" or "command:<cmdline>". A bare locator ending in
  /// ".json" is a fixture file; anything else is a command.
  static ProviderBinding parse(std::string_view spec);
};

/// Looks up the exact input text in a JSON object mapping input to output.
/// The file is read on first use.
class FixtureParaphraser final : public Paraphraser {
 public:
  explicit FixtureParaphraser(std::string path);
  std::string paraphrase(const ParaphraseRequest& request) override;

 private:
  void load();

  std::string path_;
  std::optional<std::unordered_map<std::string, std::string>> table_;
};

/// Runs a command per request: the request JSON goes to its stdin and a
/// {"text": ...} object is expected on stdout with exit status 0. The
/// command line is split on whitespace; no shell is involved.
class CommandParaphraser final : public Paraphraser {
 public:
  explicit CommandParaphraser(std::string command_line);
  std::string paraphrase(const ParaphraseRequest& request) override;

 private:
  std::string command_line_;
};

/// Always throws ProviderUnavailable; used when no provider is configured.
class UnavailableParaphraser final : public Paraphraser {
 public:
  std::string paraphrase(const ParaphraseRequest& request) override;
};

std::unique_ptr<Paraphraser> make_paraphraser(const ProviderBinding& binding);

}  // namespace lbk
