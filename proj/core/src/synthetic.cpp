#include "ragmcp/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ragmcp/errors.hpp"
#include "ragmcp/tokens.hpp"
#include "rng.hpp"

namespace ragmcp {
namespace {

using P = ParamKind;

ParamDef param(std::string name, ParamKind kind, bool required, std::string description = {}) {
  return ParamDef{std::move(name), kind, required, std::move(description)};
}

struct TaskSeed {
  const char* query;
  McpSchema schema;
};

// Twenty web-search style tasks. Tags never repeat a query word, which keeps
// the tag-less confusers a strict subset of the ground truth.
std::vector<TaskSeed> task_seeds() {
  std::vector<TaskSeed> seeds;
  seeds.push_back({"find recent arxiv preprints about diffusion models",
                   {"arxiv_scholar", "ArxivScholar",
                    "Search arXiv preprints by keyword, author or category",
                    {"academic", "papers"}, std::nullopt,
                    {{"search_preprints", "Query arXiv listings",
                      {param("keyword", P::String, true), param("author", P::String, false),
                       param("max_results", P::Integer, false)}},
                     {"fetch_abstract", "Return the abstract of a preprint",
                      {param("arxiv_id", P::String, true)}}}}});
  seeds.push_back({"look up the current weather forecast for lisbon this weekend",
                   {"skycast_weather", "SkyCast Weather",
                    "Weather forecasts and current conditions for any city",
                    {"meteorology", "climate"}, std::nullopt,
                    {{"get_forecast", "Multi-day weather forecast",
                      {param("city", P::String, true), param("days", P::Integer, false)}},
                     {"get_conditions", "Current weather conditions",
                      {param("city", P::String, true)}}}}});
  seeds.push_back({"get the latest stock quote and price for nvidia shares",
                   {"market_quotes", "MarketQuotes", "Real-time stock quotes and ticker prices",
                    {"finance", "equities"}, std::nullopt,
                    {{"quote", "Latest quote for a ticker", {param("ticker", P::String, true)}},
                     {"history", "Historical daily prices",
                      {param("ticker", P::String, true), param("range", P::String, false)}}}}});
  seeds.push_back({"search for cheap flights from berlin to tokyo in march",
                   {"flight_finder", "FlightFinder",
                    "Search airline flights and fares between airports", {"travel", "airfare"},
                    std::nullopt,
                    {{"search_flights", "Find flights for a route and date",
                      {param("origin", P::String, true), param("destination", P::String, true),
                       param("date", P::String, true), param("passengers", P::Integer, false)}}}}});
  seeds.push_back({"find a vegetarian lasagna recipe with cooking time",
                   {"recipe_box", "RecipeBox", "Search cooking recipes by ingredient, cuisine or diet",
                    {"food", "kitchen"}, std::nullopt,
                    {{"find_recipes", "Recipes matching ingredients",
                      {param("ingredients", P::Array, true), param("diet", P::String, false)}},
                     {"recipe_details", "Steps and timings for one recipe",
                      {param("recipe_id", P::String, true)}}}}});
  seeds.push_back({"show me today's top headlines about the election",
                   {"headline_wire", "HeadlineWire", "Breaking news headlines from global publishers",
                    {"journalism", "media"}, std::nullopt,
                    {{"top_headlines", "Current top headlines",
                      {param("topic", P::String, false), param("country", P::String, false)}},
                     {"search_articles", "Search news articles",
                      {param("keywords", P::String, true), param("from_date", P::String, false)}}}}});
  seeds.push_back({"what does the encyclopedia article on photosynthesis say",
                   {"wiki_lookup", "WikiLookup", "Encyclopedia article summaries from Wikipedia",
                    {"reference", "knowledge"}, std::nullopt,
                    {{"summary", "Summary of an encyclopedia article",
                      {param("title", P::String, true), param("language", P::String, false)}}}}});
  seeds.push_back({"find coffee shops near the eiffel tower with ratings",
                   {"place_scout", "PlaceScout", "Nearby places, points of interest and ratings",
                    {"maps", "local"}, std::nullopt,
                    {{"nearby", "Places near a location",
                      {param("location", P::String, true), param("category", P::String, false),
                       param("radius", P::Number, false)}}}}});
  seeds.push_back({"search patent filings for solid state battery inventions",
                   {"patent_seek", "PatentSeek", "Search patent filings, inventors and claims",
                    {"intellectual", "property"}, std::nullopt,
                    {{"search_patents", "Full-text patent search",
                      {param("terms", P::String, true), param("assignee", P::String, false),
                       param("year", P::Integer, false)}}}}});
  seeds.push_back({"find open source repositories implementing raft consensus",
                   {"repo_finder", "RepoFinder", "Search open source code repositories and projects",
                    {"github", "software"}, std::nullopt,
                    {{"search_repositories", "Repositories matching a query",
                      {param("query", P::String, true), param("language", P::String, false),
                       param("stars", P::Integer, false)}}}}});
  seeds.push_back({"look up the cast and release date of the movie dune",
                   {"cine_base", "CineBase", "Movie and television metadata: cast, crew, release dates",
                    {"entertainment", "film"}, std::nullopt,
                    {{"movie_info", "Details for a movie title",
                      {param("title", P::String, true), param("year", P::Integer, false)}}}}});
  seeds.push_back({"get live football scores for the premier league",
                   {"scoreboard_live", "ScoreBoard Live",
                    "Live sports scores, fixtures and league tables", {"sports", "fixtures"},
                    std::nullopt,
                    {{"live_scores", "Scores of matches in progress",
                      {param("league", P::String, true)}},
                     {"standings", "League table",
                      {param("league", P::String, true), param("season", P::String, false)}}}}});
  seeds.push_back({"find hotel rooms in kyoto available next friday under 150 dollars",
                   {"stay_scanner", "StayScanner", "Hotel availability and room rates",
                    {"lodging", "accommodation"}, std::nullopt,
                    {{"search_hotels", "Hotels with free rooms",
                      {param("city", P::String, true), param("checkin", P::String, true),
                       param("nights", P::Integer, false), param("max_price", P::Number, false)}}}}});
  seeds.push_back({"what is the exchange rate from euro to japanese yen today",
                   {"fx_rates", "FxRates", "Currency exchange rates and conversion",
                    {"forex", "money"}, std::nullopt,
                    {{"convert", "Convert an amount between currencies",
                      {param("from", P::String, true), param("to", P::String, true),
                       param("amount", P::Number, false)}}}}});
  seeds.push_back({"search job listings for remote rust developer positions",
                   {"job_board", "JobBoard", "Job listings and openings aggregated from career sites",
                    {"careers", "hiring"}, std::nullopt,
                    {{"search_jobs", "Open positions matching a title",
                      {param("title", P::String, true), param("location", P::String, false),
                       param("remote", P::Boolean, false)}}}}});
  seeds.push_back({"compare prices for noise cancelling headphones across online stores",
                   {"price_compare", "PriceCompare", "Compare product prices across online retailers",
                    {"shopping", "retail"}, std::nullopt,
                    {{"compare_prices", "Offers for a product",
                      {param("product", P::String, true), param("max_results", P::Integer, false)}}}}});
  seeds.push_back({"look up symptoms and treatments for migraine",
                   {"health_ref", "HealthRef", "Medical reference for conditions, symptoms and treatments",
                    {"medicine", "clinical"}, std::nullopt,
                    {{"condition_info", "Overview of a medical condition",
                      {param("condition", P::String, true)}}}}});
  seeds.push_back({"find books by ursula le guin with publication years",
                   {"book_shelf", "BookShelf", "Book catalog search by title, author or isbn",
                    {"library", "literature"}, std::nullopt,
                    {{"search_books", "Books matching title, author or isbn",
                      {param("author", P::String, false), param("title", P::String, false),
                       param("isbn", P::String, false)}}}}});
  seeds.push_back({"search for public domain images of lighthouses",
                   {"image_hunt", "ImageHunt",
                    "Image search across public domain and stock photo collections",
                    {"photography", "visual"}, std::nullopt,
                    {{"search_images", "Images matching a query",
                      {param("query", P::String, true), param("license", P::String, false),
                       param("count", P::Integer, false)}}}}});
  seeds.push_back({"search the web for reviews of the framework laptop",
                   {"web_search", "WebSearch", "General purpose web search engine results",
                    {"engine", "general"}, std::nullopt,
                    {{"web_search", "Ranked web results for a query",
                      {param("query", P::String, true), param("count", P::Integer, false),
                       param("safe_search", P::Boolean, false)}}}}});
  return seeds;
}

const std::vector<std::string> kFillers = {
    "find", "search", "web",  "look",   "up",      "get",         "latest",
    "current", "recent", "the", "for",  "about",   "with",        "and",
    "online", "results", "information", "today", "show", "me"};

const std::vector<std::string> kNouns = {
    "ledger",     "invoice",   "payroll",   "thermostat", "printer",   "calendar",  "mailbox",
    "spreadsheet", "worksheet", "folder",   "directory",  "archive",   "backup",    "snapshot",
    "cluster",    "pod",       "container", "volume",     "secret",    "pipeline",  "commit",
    "branch",     "ticket",    "sprint",    "backlog",    "queue",     "broker",    "sensor",
    "firmware",   "device",    "relay",     "lamp",       "garage",    "doorbell",  "vacuum",
    "playlist",   "album",     "podcast",   "episode",    "workout",   "heartbeat", "calorie",
    "journal",    "notebook",  "reminder",  "alarm",      "timer",     "contact",   "meeting",
    "invite",     "roster",    "inventory", "warehouse",  "shipment",  "parcel",    "pallet",
    "barcode",    "customer",  "quota",     "campaign",   "newsletter", "subscriber", "survey",
    "poll",       "signature", "contract",  "clause",     "template",  "diagram",   "canvas",
    "slide",      "deck",      "chart",     "dashboard",  "metric",    "alert",     "incident",
    "pager",      "runbook",   "trace",     "bucket",     "blob",      "certificate", "vault",
    "policy",     "role",      "permission", "tenant",    "billing",   "refund",    "coupon",
    "cart",       "checkout",  "kiosk",     "locker",     "badge",     "shift",     "timesheet",
    "expense",    "receipt",   "budget",    "sprinkler",  "irrigation", "greenhouse", "aquarium",
    "pantry",     "fridge",    "oven",      "blender",    "kettle",    "toaster",   "treadmill",
    "bicycle",    "scooter",   "charger",   "inverter",   "meter",     "valve",     "pump",
    "boiler",     "furnace",   "elevator",  "turnstile",  "microphone", "speaker",  "keyboard",
    "projector",  "whiteboard", "stapler",  "envelope",   "postage",   "courier",   "drone",
    "robot",      "conveyor",  "forklift",  "crane",      "spool",     "lathe",     "kiln"};

const std::vector<std::string> kVerbs = {
    "create",   "update",   "delete",  "list",     "sync",      "export",   "import",
    "restore",  "rotate",   "schedule", "assign",  "approve",   "reject",   "merge",
    "deploy",   "rollback", "scale",   "restart",  "pause",     "resume",   "toggle",
    "dim",      "lock",     "unlock",  "scan",     "print",     "upload",   "download",
    "rename",   "move",     "copy",    "label",    "notify",    "remind",   "snooze",
    "measure",  "record",   "transcribe", "encrypt", "decrypt", "sign",     "provision",
    "decommission", "bill", "ship",    "receive",  "count",     "audit",    "calibrate",
    "mute",     "unmute",   "water",   "feed",     "charge",    "reboot",   "flash",
    "pair",     "unpair",   "reconcile", "allocate", "dispatch", "manage",  "automate",
    "monitor",  "control",  "configure", "inspect", "organize", "tidy",     "purge"};

const std::vector<std::string> kSuffixes = {"id",   "name",  "count", "limit", "path",
                                            "mode", "level", "code",  "label", "size"};

std::string capitalize(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 32);
  return word;
}

std::unordered_set<std::string> task_vocabulary(const std::vector<TaskSeed>& seeds) {
  std::unordered_set<std::string> vocab;
  for (const auto& s : seeds) {
    for (auto& t : tokenize(s.query)) vocab.insert(std::move(t));
    for (auto& t : tokenize(canonical_document(s.schema).text)) vocab.insert(std::move(t));
  }
  return vocab;
}

std::vector<std::string> filtered(const std::vector<std::string>& words,
                                  const std::unordered_set<std::string>& banned) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    // Param names join with suffixes through '_', which tokenizes as one word,
    // so only the bare word has to stay clear of the task vocabulary.
    if (!banned.count(w)) out.push_back(w);
  }
  return out;
}

McpSchema make_distractor(std::size_t index, const std::vector<std::string>& nouns,
                          const std::vector<std::string>& verbs, double overlap, detail::Rng& rng) {
  const auto pick = [&](const std::vector<std::string>& pool) -> const std::string& {
    return pool[rng.below(pool.size())];
  };

  McpSchema s;
  char id[16];
  std::snprintf(id, sizeof id, "mcp_%05zu", index);
  s.id = id;
  const std::string& head = pick(nouns);
  const std::string& tail = pick(nouns);
  s.name = capitalize(head) + capitalize(tail);

  std::vector<std::string> words;
  const std::size_t desc_len = 5 + rng.below(5);
  for (std::size_t i = 0; i < desc_len; ++i) words.push_back(i % 2 == 0 ? pick(verbs) : pick(nouns));
  for (const auto& f : kFillers) {
    if (rng.uniform() < overlap) words.push_back(f);
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) s.description += ' ';
    s.description += words[i];
  }

  const std::size_t tag_count = 1 + rng.below(3);
  for (std::size_t i = 0; i < tag_count; ++i) s.tags.push_back(pick(nouns));

  const std::size_t tool_count = 1 + rng.below(3);
  std::set<std::string> tool_names;
  while (s.tools.size() < tool_count) {
    ToolDef tool;
    tool.name = pick(verbs) + "_" + pick(nouns);
    if (!tool_names.insert(tool.name).second) continue;
    tool.description = capitalize(pick(verbs)) + " " + pick(nouns) + " " + pick(nouns);
    const std::size_t param_count = 1 + rng.below(3);
    std::set<std::string> param_names;
    while (tool.params.size() < param_count) {
      auto name = pick(nouns) + "_" + pick(kSuffixes);
      if (!param_names.insert(name).second) continue;
      const auto kind = static_cast<ParamKind>(rng.below(6));
      tool.params.push_back(param(std::move(name), kind, rng.below(2) == 0));
    }
    s.tools.push_back(std::move(tool));
  }
  return s;
}

}  // namespace

const std::vector<std::string>& query_filler_words() { return kFillers; }

std::vector<McpSchema> websearch_ground_truths() {
  std::vector<McpSchema> out;
  for (auto& s : task_seeds()) out.push_back(std::move(s.schema));
  return out;
}

std::vector<Task> websearch_tasks() {
  std::vector<Task> out;
  std::size_t i = 0;
  for (const auto& s : task_seeds()) {
    char id[16];
    std::snprintf(id, sizeof id, "task_%02zu", i++);
    out.push_back({id, s.query, s.schema.id});
  }
  return out;
}

Benchmark make_websearch_benchmark(const SyntheticBankOptions& options) {
  if (options.query_overlap < 0.0 || options.query_overlap > 1.0) {
    throw ConfigError("query_overlap must be within [0, 1]");
  }
  const auto seeds = task_seeds();
  const auto vocab = task_vocabulary(seeds);
  const auto nouns = filtered(kNouns, vocab);
  const auto verbs = filtered(kVerbs, vocab);

  Benchmark out;
  std::vector<McpSchema> schemas;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& seed = seeds[i];
    char id[16];
    std::snprintf(id, sizeof id, "task_%02zu", i);
    const std::string query =
        options.verbatim_queries ? canonical_document(seed.schema).text : std::string(seed.query);
    out.tasks.push_back({id, query, seed.schema.id});
    schemas.push_back(seed.schema);
  }

  detail::Rng rng(options.seed);
  for (std::size_t i = 0; i < options.distractors; ++i) {
    schemas.push_back(make_distractor(i, nouns, verbs, options.query_overlap, rng));
  }

  for (std::size_t t = 0; t < seeds.size(); ++t) {
    const auto& gt = seeds[t].schema;
    const auto query_tokens = tokenize(out.tasks[t].query);
    for (const auto& tag : gt.tags) {
      for (const auto& tok : tokenize(tag)) {
        if (!options.verbatim_queries &&
            std::find(query_tokens.begin(), query_tokens.end(), tok) != query_tokens.end()) {
          throw std::logic_error("ground truth tag '" + tag + "' repeats a query word");
        }
      }
    }
    for (std::size_t j = 0; j < options.confusers_per_task; ++j) {
      McpSchema confuser = gt;
      confuser.id = gt.id + "-mirror-" + std::to_string(j + 1);
      confuser.tags.clear();
      schemas.push_back(std::move(confuser));
    }
  }

  out.bank = Registry(std::move(schemas), Timestamp(std::chrono::milliseconds(0)));
  return out;
}

SyntheticBankOptions default_bank_options() { return SyntheticBankOptions{}; }

SyntheticBankOptions token_disjoint_bank_options() {
  SyntheticBankOptions o;
  o.distractors = 1100;
  o.query_overlap = 0.0;
  o.confusers_per_task = 0;
  o.verbatim_queries = true;
  return o;
}

SyntheticBankOptions degradation_bank_options() {
  SyntheticBankOptions o;
  o.distractors = 1100;
  o.query_overlap = 0.0;
  o.confusers_per_task = 3;
  return o;
}

SyntheticBankOptions synthetic_options_from_json(const nlohmann::json& value) {
  SyntheticBankOptions o;
  if (value.is_string()) {
    const auto name = value.get<std::string>();
    if (name == "default") return default_bank_options();
    if (name == "token_disjoint") return token_disjoint_bank_options();
    if (name == "degradation") return degradation_bank_options();
    throw ConfigError("unknown synthetic bank preset '" + name + "'");
  }
  if (!value.is_object()) throw ConfigError("synthetic bank must be a preset name or an object");
  if (const auto it = value.find("preset"); it != value.end()) {
    o = synthetic_options_from_json(*it);
  }
  o.distractors = value.value("distractors", o.distractors);
  o.query_overlap = value.value("query_overlap", o.query_overlap);
  o.confusers_per_task = value.value("confusers_per_task", o.confusers_per_task);
  o.verbatim_queries = value.value("verbatim_queries", o.verbatim_queries);
  o.seed = value.value("seed", o.seed);
  return o;
}

}  // namespace ragmcp
