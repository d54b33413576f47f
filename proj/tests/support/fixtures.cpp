#include "fixtures.hpp"

#include <fstream>

#include "argeval/backends.hpp"
#include "argeval/store.hpp"

namespace fixtures {

using nlohmann::json;

Condition cond(const char* json_text) { return parse_condition(std::string_view(json_text)); }

GeneralQbaf make_general(const Entity& option, const std::vector<ArgSpec>& args) {
  GeneralQbaf g;
  g.option = option;
  for (const auto& a : args) {
    g.qbaf.arguments.push_back({a.id, a.text, a.score});
    if (a.parent.empty()) {
      g.qbaf.root = a.id;
      continue;
    }
    g.qbaf.relations.push_back({a.id, a.parent, a.polarity});
    g.nl_conditions[a.id] = a.nl;
    g.conditions[a.id] = cond(a.condition);
  }
  if (auto report = g.validate(); !report.ok()) throw std::logic_error("bad fixture: " + report.summary());
  return g;
}

ParameterSchema gbm_schema() {
  ParameterSchema s;
  s.add({"age", ValueType::Integer, "Patient age in years.", std::nullopt, 18, 120});
  s.add({"eloquent_structure_involvement", ValueType::Boolean, "Whether the tumour involves eloquent brain structures.",
         std::nullopt, std::nullopt, std::nullopt});
  s.add({"kps", ValueType::Integer, "Karnofsky performance status.", std::nullopt, 0, 100});
  s.add({"mgmt_status", ValueType::String, "MGMT promoter methylation status.",
         std::vector<ParamValue>{std::string("methylated"), std::string("unmethylated")}, std::nullopt, std::nullopt});
  s.add({"sex", ValueType::String, "Patient sex.", std::vector<ParamValue>{std::string("male"), std::string("female")},
         std::nullopt, std::nullopt});
  s.add({"tumour_location", ValueType::String, "Anatomical location of the tumour.",
         std::vector<ParamValue>{std::string("non-dominant frontal lobe"), std::string("thalamus"),
                                 std::string("brainstem")},
         std::nullopt, std::nullopt});
  return s;
}

GeneralQbaf resection_general() {
  const Entity option{"surgical-tumour-resection", "Surgical Tumour Resection", "Removal of as much tumour as is safe."};
  return make_general(
      option,
      {
          {"arg0", "", Polarity::Attack, "Surgical Tumour Resection is recommended.", 0.5, "", "{}"},
          {"arg1", "arg0", Polarity::Attack,
           "Resection risks permanent deficits when eloquent structures are involved or performance status is very poor.",
           0.8, "Applies when the tumour involves eloquent structures or KPS is below 50.", kListing1},
          {"arg2", "arg0", Polarity::Attack, "Perioperative risk rises steeply in very old patients.", 0.6,
           "Applies to patients aged 80 or older.", R"({"properties": {"age": {"type": "integer", "minimum": 80}}})"},
          {"arg3", "arg0", Polarity::Support, "Maximal safe resection prolongs survival.", 0.8,
           "Applies when KPS is at least 50.", R"({"properties": {"kps": {"type": "integer", "minimum": 50}}})"},
          {"arg4", "arg1", Polarity::Support, "Thalamic and brainstem tumours are deep-seated and rarely resectable.",
           0.7, "Applies to thalamic or brainstem tumours.",
           R"({"properties": {"tumour_location": {"enum": ["thalamus", "brainstem"]}}})"},
          {"arg5", "arg2", Polarity::Support, "Frailty compounds the surgical risk in the elderly.", 0.5,
           "Applies to any documented performance status.",
           R"({"properties": {"kps": {"type": "integer", "maximum": 100}}})"},
      });
}

CaseParameters resection_case() {
  CaseParameters p;
  p.values = {{"age", std::int64_t{62}},
              {"kps", std::int64_t{70}},
              {"eloquent_structure_involvement", true},
              {"tumour_location", std::string("thalamus")},
              {"mgmt_status", std::string("methylated")},
              {"sex", std::string("female")}};
  return p;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kRoot = "Glioblastoma Treatment Option Ontology";

json entity(const char* name, const char* description = "") { return {{"name", name}, {"description", description}}; }
json edge(const char* parent, const char* child) { return {{"parent", parent}, {"child", child}}; }

struct CorpusDoc {
  const char* id;
  bool proton;
  bool cyclic;
};

constexpr CorpusDoc kCorpusDocs[] = {
    {"eano-2021", false, false},
    {"esmo-2023", false, false},
    {"nccn-2024", true, false},
    {"nice-2018", true, true},
};

}  // namespace

const char* const kRt60 = "Radiotherapy 60 Gy in 30 Fractions";
const char* const kSurgery = "Surgical Tumour Resection";

std::vector<Document> treatment_corpus() {
  std::vector<Document> docs;
  for (const auto& d : kCorpusDocs) {
    Document doc{d.id, {}};
    std::string a = std::string("Newly diagnosed glioblastoma is managed with maximal safe surgical tumour resection "
                                "followed by radiotherapy, usually 60 Gy in 30 fractions; elderly or frail patients "
                                "may receive 40 Gy in 15 fractions.");
    if (d.proton) a += " Proton beam therapy is under investigation.";
    doc.chunks.push_back({std::string(d.id) + "-1", d.id, a, 0});
    doc.chunks.push_back({std::string(d.id) + "-2", d.id,
                          "Alkylating agent chemotherapy with temozolomide is standard; carmustine wafers, PCV and "
                          "lomustine (CCNU) are alternatives.",
                          1});
    doc.chunks.push_back({std::string(d.id) + "-3", d.id,
                          "Alternating electric field therapy and bevacizumab have a limited role; temozolomide "
                          "chemoradiotherapy combines both modalities.",
                          2});
    docs.push_back(std::move(doc));
  }
  return docs;
}

json treatment_ontology_script() {
  json replies = json::array();
  for (const auto& d : kCorpusDocs) {
    json a = {{"entities",
               {entity(kRoot, "Treatment options for glioblastoma."), entity(kSurgery, "Removal of the tumour."),
                entity("Radiotherapy", "External beam radiotherapy."),
                entity(kRt60, "Standard fractionation."), entity("Radiotherapy 40 Gy in 15 Fractions", "Hypofractionation.")}},
              {"hierarchy",
               {edge(kRoot, kSurgery), edge(kRoot, "Radiotherapy"), edge("Radiotherapy", kRt60),
                edge("Radiotherapy", "Radiotherapy 40 Gy in 15 Fractions")}}};
    if (d.proton) {
      a["entities"].push_back(entity("Proton Beam Therapy", "Particle radiotherapy."));
      a["hierarchy"].push_back(edge("Radiotherapy", "Proton Beam Therapy"));
    }
    if (d.cyclic) a["hierarchy"].push_back(edge(kRt60, "Radiotherapy"));
    replies.push_back(a);

    replies.push_back(
        {{"entities",
          {entity("Alkylating Agent Chemotherapy", "DNA-alkylating cytotoxic drugs."),
           entity("Temozolomide Chemotherapy", "Oral temozolomide."), entity("Carmustine Chemotherapy", "BCNU."),
           entity("Carmustine Polymer Wafer Implantation", "Intraoperative carmustine wafers."),
           entity("PCV Chemotherapy", "Procarbazine, lomustine and vincristine."),
           entity("Lomustine (CCNU) Chemotherapy", "Oral lomustine.")}},
         {"hierarchy",
          {edge(kRoot, "Alkylating Agent Chemotherapy"),
           edge("Alkylating Agent Chemotherapy", "Temozolomide Chemotherapy"),
           edge("Alkylating Agent Chemotherapy", "Carmustine Chemotherapy"),
           edge("Carmustine Chemotherapy", "Carmustine Polymer Wafer Implantation"),
           edge("Alkylating Agent Chemotherapy", "PCV Chemotherapy"), edge(kRoot, "Lomustine (CCNU) Chemotherapy")}}});

    replies.push_back(
        {{"entities",
          {entity("Alternating Electric Field Therapy", "Tumour treating fields."),
           entity("Bevacizumab", "Anti-VEGF antibody."),
           entity("Temozolomide Chemoradiotherapy", "Concurrent temozolomide and radiotherapy."),
           entity("Combined Modality Treatment", "Treatments combining several modalities.")}},
         {"hierarchy",
          {edge(kRoot, "Alternating Electric Field Therapy"), edge(kRoot, "Bevacizumab"),
           edge("Radiotherapy", "Temozolomide Chemoradiotherapy"),
           edge("Combined Modality Treatment", "Temozolomide Chemoradiotherapy")}}});
  }
  json wrapped = json::array();
  for (auto& r : replies) wrapped.push_back({{"json", std::move(r)}});
  return {{"sequences", {{"mine_ontology", wrapped}}}};
}

Ontology treatment_ontology() {
  llm::MockBackend mock(treatment_ontology_script());
  llm::UsageAccumulator usage;
  llm::Client client(mock, usage);
  return construct_ontology(treatment_corpus(), llm_ontology_miner(client));
}

SelectionCriteria treatment_selection() { return {3, true, true}; }

std::string option_id(const Artifacts& a, const char* name) {
  const Entity* e = a.ontology.find_by_name(name);
  if (e == nullptr) throw std::logic_error(std::string("fixture has no entity ") + name);
  return e->id;
}

Artifacts treatment_artifacts() {
  Artifacts a;
  a.ontology = treatment_ontology();
  for (const auto& e : select_options(a.ontology, treatment_selection())) a.options.push_back(e.id);
  a.schema = gbm_schema();

  auto add = [&](const char* name, std::vector<ArgSpec> args) {
    const Entity& e = *a.ontology.find_by_name(name);
    args.insert(args.begin(), ArgSpec{"arg0", "", Polarity::Attack, e.name + " is recommended.", 0.5, "", "{}"});
    a.qbafs.emplace(e.id, make_general(e, args));
  };
  const auto A = Polarity::Attack;
  const auto S = Polarity::Support;

  add(kSurgery,
      {{"arg1", "arg0", A, "Resection is contraindicated when the tumour involves eloquent structures or performance status is very poor.",
        0.9, "Applies when eloquent structures are involved or KPS is below 50.", kListing1},
       {"arg2", "arg0", A, "Perioperative risk is high in very old patients.", 0.6, "Applies to patients aged 80 or older.",
        R"({"properties": {"age": {"type": "integer", "minimum": 80}}})"},
       {"arg3", "arg0", S, "Maximal safe resection prolongs survival in fit patients.", 0.8,
        "Applies when KPS is at least 50.", R"({"properties": {"kps": {"type": "integer", "minimum": 50}}})"}});
  add(kRt60,
      {{"arg1", "arg0", A, "A shorter 40 Gy course is preferred for patients over 70.", 0.85,
        "Applies to patients aged 70 or older.", R"({"properties": {"age": {"type": "integer", "minimum": 70}}})"},
       {"arg2", "arg0", A, "Six weeks of daily treatment is a heavy burden for older patients.", 0.85,
        "Applies to patients aged 65 or older.", R"({"properties": {"age": {"type": "integer", "minimum": 65}}})"},
       {"arg3", "arg0", S, "60 Gy in 30 fractions is standard for patients with good performance status.", 0.7,
        "Applies when KPS is at least 70.", R"({"properties": {"kps": {"type": "integer", "minimum": 70}}})"},
       {"arg4", "arg0", S, "Full-dose radiotherapy improves local control when performance status allows.", 0.7,
        "Applies when KPS is above 50.", R"({"properties": {"kps": {"type": "integer", "exclusiveMinimum": 50}}})"},
       {"arg5", "arg0", S, "Conventional fractionation is well tolerated outside the brainstem.", 0.7,
        "Applies unless the tumour is in the brainstem.",
        R"({"not": {"properties": {"tumour_location": {"const": "brainstem"}}}})"},
       {"arg6", "arg0", S, "Radiotherapy is the backbone of first-line treatment.", 0.7,
        "Applies unless the tumour is known to be MGMT unmethylated.",
        R"({"properties": {"mgmt_status": {"type": "string", "enum": ["methylated", "unknown"]}}})"}});
  add("Radiotherapy 40 Gy in 15 Fractions",
      {{"arg1", "arg0", S, "Hypofractionated radiotherapy is preferred for elderly patients.", 0.8,
        "Applies to patients aged 65 or older.", R"({"properties": {"age": {"type": "integer", "minimum": 65}}})"},
       {"arg2", "arg0", A, "Younger fit patients benefit from the full 60 Gy dose.", 0.7,
        "Applies to patients younger than 65.", R"({"properties": {"age": {"type": "integer", "maximum": 64}}})"}});
  add("Temozolomide Chemotherapy",
      {{"arg1", "arg0", S, "Temozolomide prolongs survival in MGMT-methylated tumours.", 0.9,
        "Applies to MGMT-methylated tumours.", R"({"properties": {"mgmt_status": {"const": "methylated"}}})"},
       {"arg2", "arg0", A, "The benefit of temozolomide is small in unmethylated tumours.", 0.7,
        "Applies to MGMT-unmethylated tumours.", R"({"properties": {"mgmt_status": {"const": "unmethylated"}}})"},
       {"arg3", "arg0", S, "Temozolomide is well tolerated in fit patients.", 0.6, "Applies when KPS is at least 60.",
        R"({"properties": {"kps": {"type": "integer", "minimum": 60}}})"}});
  add("Carmustine Polymer Wafer Implantation",
      {{"arg1", "arg0", A, "Wafers can only be placed during resection and carry local complications.", 0.8,
        "Applies to all patients.", "{}"},
       {"arg2", "arg0", S, "Local delivery bypasses the blood-brain barrier.", 0.4, "Applies when KPS is at least 70.",
        R"({"properties": {"kps": {"type": "integer", "minimum": 70}}})"}});
  add("PCV Chemotherapy",
      {{"arg1", "arg0", A, "PCV is not a standard first-line regimen for glioblastoma.", 0.7, "Applies to all patients.",
        "{}"},
       {"arg2", "arg0", S, "PCV is an option for fit younger patients at recurrence.", 0.3,
        "Applies to patients aged 70 or younger.", R"({"properties": {"age": {"type": "integer", "maximum": 70}}})"}});
  add("Lomustine (CCNU) Chemotherapy",
      {{"arg1", "arg0", S, "Lomustine is an established option at recurrence.", 0.5, "Applies to all patients.", "{}"},
       {"arg2", "arg0", A, "Myelosuppression limits lomustine in frail patients.", 0.6, "Applies when KPS is below 60.",
        R"({"allOf": [{"required": ["kps"]}, {"properties": {"kps": {"type": "integer", "exclusiveMaximum": 60}}}]})"}});
  add("Alternating Electric Field Therapy",
      {{"arg1", "arg0", S, "Tumour treating fields extend survival alongside maintenance temozolomide.", 0.7,
        "Applies when KPS is at least 70.", R"({"properties": {"kps": {"type": "integer", "minimum": 70}}})"},
       {"arg2", "arg0", A, "Device adherence is difficult for very old patients.", 0.5,
        "Applies to patients aged 80 or older.", R"({"properties": {"age": {"type": "integer", "minimum": 80}}})"}});
  add("Bevacizumab",
      {{"arg1", "arg0", A, "Bevacizumab does not improve overall survival.", 0.8, "Applies to all patients.", "{}"},
       {"arg2", "arg0", S, "Bevacizumab can reduce steroid needs from oedema around deep tumours.", 0.5,
        "Applies to thalamic or brainstem tumours.",
        R"({"properties": {"tumour_location": {"enum": ["thalamus", "brainstem"]}}})"}});

  if (auto report = a.validate(); !report.ok()) throw std::logic_error("bad treatment fixture: " + report.summary());
  return a;
}

std::vector<Contestation> treatment_edits(const Artifacts& a) {
  const auto rt60 = option_id(a, kRt60);
  std::vector<Contestation> edits;
  for (const char* id : {"arg1", "arg2"}) {
    edits.push_back({edit::SetBaseScore{rt60, id, 0.9}, "Attackers favouring the shorter course are understated."});
  }
  for (const char* id : {"arg3", "arg4", "arg5", "arg6"}) {
    edits.push_back({edit::SetBaseScore{rt60, id, 0.65}, "Supporters overstate suitability for older patients."});
  }
  edits.push_back({edit::EditParameterDescription{
                       "eloquent_structure_involvement",
                       "Whether the tumour involves eloquent or deep-seated brain structures, such as motor or language "
                       "cortex, the thalamus, the basal ganglia or the brainstem, which makes resection unsafe."},
                   "Thalamic tumours were not recognised as eloquent during extraction."});
  return edits;
}

CaseParameters treatment_trigger_params() {
  CaseParameters p;
  p.values = {{"age", std::int64_t{75}},
              {"mgmt_status", std::string("methylated")},
              {"kps", std::int64_t{90}},
              {"tumour_location", std::string("thalamus")},
              {"sex", std::string("male")},
              {"eloquent_structure_involvement", false}};
  return p;
}

CaseParameters treatment_trigger_params_clarified() {
  CaseParameters p = treatment_trigger_params();
  p.values["eloquent_structure_involvement"] = true;
  return p;
}

std::string treatment_trigger_vignette() {
  return "A 75-year-old man presents with a newly diagnosed glioblastoma of the thalamus. The MGMT promoter is "
         "methylated and his Karnofsky performance status is 90.";
}

CaseParameters treatment_second_params() {
  CaseParameters p;
  p.values = {{"age", std::int64_t{85}},
              {"mgmt_status", std::string("unknown")},
              {"kps", std::int64_t{70}},
              {"tumour_location", std::string("non-dominant frontal lobe")},
              {"sex", std::string("female")}};
  return p;
}

CaseParameters treatment_untouched_params() {
  CaseParameters p;
  p.values = {{"age", std::int64_t{50}},
              {"mgmt_status", std::string("unmethylated")},
              {"kps", std::int64_t{10}},
              {"tumour_location", std::string("brainstem")},
              {"sex", std::string("male")}};
  return p;
}

json treatment_extraction_script(const ParameterSchema& before, const ParameterSchema& after) {
  const auto key_before = llm::MockBackend::content_key(extraction_request(treatment_trigger_vignette(), before));
  const auto key_after = llm::MockBackend::content_key(extraction_request(treatment_trigger_vignette(), after));
  return {{"by_content",
           {{key_before, {{"json", to_json(treatment_trigger_params())}}},
            {key_after, {{"json", to_json(treatment_trigger_params_clarified())}}}}}};
}

// ---------------------------------------------------------------------------

eval::ParamGrid treatment_grid() {
  auto ints = [](std::initializer_list<std::int64_t> xs) {
    std::vector<ParamValue> out;
    for (auto x : xs) out.emplace_back(x);
    return out;
  };
  auto strs = [](std::initializer_list<const char*> xs) {
    std::vector<ParamValue> out;
    for (auto x : xs) out.emplace_back(std::string(x));
    return out;
  };
  return {{"age", ints({50, 60, 75, 85})},
          {"mgmt_status", strs({"methylated", "unknown", "unmethylated"})},
          {"kps", ints({10, 30, 50, 70, 90})},
          {"tumour_location", strs({"non-dominant frontal lobe", "thalamus", "brainstem"})},
          {"sex", strs({"male", "female"})}};
}

namespace {

std::string case_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "case-%03zu", i + 1);
  return buf;
}

std::string vignette(const CaseParameters& p) {
  auto s = [&](const char* k) { return std::get<std::string>(p.values.at(k)); };
  auto n = [&](const char* k) { return std::to_string(std::get<std::int64_t>(p.values.at(k))); };
  return "A " + n("age") + "-year-old " + s("sex") + " patient with glioblastoma of the " + s("tumour_location") +
         "; MGMT promoter status " + s("mgmt_status") + "; KPS " + n("kps") + ".";
}

}  // namespace

eval::LabelledDataset grid_dataset(const Artifacts& a) {
  using eval::Label;
  eval::LabelledDataset d;
  const auto grid = eval::generate_grid(treatment_grid());
  for (std::size_t i = 0; i < grid.size(); ++i) d.cases.push_back({case_id(i), grid[i], vignette(grid[i])});
  d.options = a.options;
  std::sort(d.options.begin(), d.options.end());

  const auto rt40 = option_id(a, "Radiotherapy 40 Gy in 15 Fractions");
  const auto rt60 = option_id(a, kRt60);
  const auto surgery = option_id(a, kSurgery);
  const auto tmz = option_id(a, "Temozolomide Chemotherapy");
  const auto ttf = option_id(a, "Alternating Electric Field Therapy");
  for (const auto& c : d.cases) {
    const auto age = std::get<std::int64_t>(c.params.values.at("age"));
    const auto kps = std::get<std::int64_t>(c.params.values.at("kps"));
    const auto& mgmt = std::get<std::string>(c.params.values.at("mgmt_status"));
    const auto& loc = std::get<std::string>(c.params.values.at("tumour_location"));
    for (const auto& o : d.options) {
      Label l = Label::NotRecommended;
      if (o == rt40) {
        l = age >= 70 ? Label::Recommended : Label::MaybeRecommended;
      } else if (o == rt60) {
        l = age >= 75 ? Label::NotRecommended : (kps >= 70 ? Label::Recommended : Label::MaybeRecommended);
      } else if (o == surgery) {
        l = loc != "non-dominant frontal lobe" ? Label::NotRecommended
                                                : (kps >= 70 ? Label::Recommended : Label::MaybeRecommended);
      } else if (o == tmz) {
        l = mgmt == "methylated" && kps >= 50 ? Label::Recommended : Label::MaybeRecommended;
      } else if (o == ttf) {
        l = kps >= 70 && age < 80 ? Label::MaybeRecommended : Label::NotRecommended;
      }
      d.labels[{c.id, o}] = l;
    }
  }
  return d;
}

eval::LabelledDataset oracle_dataset(const Artifacts& a, std::size_t cases) {
  eval::LabelledDataset d;
  const auto grid = eval::generate_grid(treatment_grid());
  const std::size_t step = std::max<std::size_t>(1, grid.size() / cases);
  d.options = a.options;
  std::sort(d.options.begin(), d.options.end());
  const auto generals = a.frameworks();
  for (std::size_t i = 0; i < grid.size() && d.cases.size() < cases; i += step) {
    eval::DatasetCase c{case_id(d.cases.size()), grid[i], vignette(grid[i])};
    const auto result = infer_with_params(generals, c.params);
    for (const auto& o : d.options) {
      const double s = result.find(o)->score;
      d.labels[{c.id, o}] = s >= 0.5 ? eval::Label::Recommended : eval::Label::NotRecommended;
    }
    d.cases.push_back(std::move(c));
  }
  return d;
}

void write_dataset(const eval::LabelledDataset& d, const std::filesystem::path& dir) {
  std::string cases, labels;
  for (const auto& c : d.cases) {
    cases += json{{"case_id", c.id}, {"params", to_json(c.params)}, {"vignette", c.vignette}}.dump() + "\n";
  }
  for (const auto& [key, label] : d.labels) {
    labels += json{{"case_id", key.first}, {"option_id", key.second}, {"label", eval::to_string(label)}}.dump() + "\n";
  }
  write_file_atomic(dir / "cases.jsonl", cases);
  write_file_atomic(dir / "labels.jsonl", labels);
}

// ---------------------------------------------------------------------------

std::vector<Document> trace_corpus() {
  return {
      {"guideline-a",
       {{"a-1", "guideline-a", "Chemotherapy for glioblastoma is based on temozolomide.", 0},
        {"a-2", "guideline-a", "Lomustine is a nitrosourea chemotherapy used at recurrence.", 1}}},
      {"guideline-b", {{"b-1", "guideline-b", "Temozolomide and lomustine may be combined in selected patients.", 0}}},
  };
}

json trace_script() {
  auto reply = [](json body, int prompt, int completion) {
    return json{{"json", std::move(body)}, {"prompt_tokens", prompt}, {"completion_tokens", completion}};
  };
  json ontology = json::array({
      reply({{"entities", {entity("Chemotherapy", "Systemic cytotoxic treatment."), entity("Temozolomide", "Oral alkylating agent.")}},
             {"hierarchy", json::array({edge("Chemotherapy", "Temozolomide")})}},
            200, 40),
      reply({{"entities", {entity("Lomustine", "Nitrosourea alkylating agent."), entity("chemotherapy")}},
             {"hierarchy", json::array({edge("Chemotherapy", "Lomustine")})}},
            200, 40),
      reply({{"entities", {entity("Temozolomide"), entity("Lomustine")}}, {"hierarchy", json::array({edge("Temozolomide", "Chemotherapy")})}},
            200, 40),
  });
  json mining = json::array({
      reply({{"attackers",
              json::array({{{"statement", "Lomustine causes delayed myelosuppression that frail patients tolerate poorly."},
                {"condition", "Applies when KPS is below 70."}}})},
             {"supporters",
              json::array({{{"statement", "Lomustine is an established option for recurrent glioblastoma."},
                {"condition", "Applies to recurrent disease."}}})}},
            300, 80),
      reply({{"attackers",
              json::array({{{"statement", "Temozolomide adds little benefit when the MGMT promoter is unmethylated."},
                {"condition", "Applies to MGMT-unmethylated tumours."}}})},
             {"supporters",
              json::array({{{"statement", "Temozolomide with radiotherapy is standard first-line treatment."},
                {"condition", "Applies to newly diagnosed, non-recurrent disease."}}})}},
            300, 80),
  });
  json scores = json::array();
  for (const char* s : {"0.6", "0.7", "0.8", "0.9"}) {
    scores.push_back({{"text", s}, {"prompt_tokens", 120}, {"completion_tokens", 5}});
  }
  json formal = json::array({
      reply({{"condition", {{"properties", {{"kps", {{"type", "integer"}, {"maximum", 69}}}}}}},
             {"new_parameters",
              {{"kps", {{"type", "integer"}, {"description", "Karnofsky performance status."}, {"minimum", 0}, {"maximum", 100}}}}}},
            250, 60),
      reply({{"condition", {{"properties", {{"recurrent", {{"type", "boolean"}, {"const", true}}}}}}},
             {"new_parameters",
              {{"recurrent", {{"type", "boolean"}, {"description", "Whether the tumour has recurred after first-line treatment."}}}}}},
            250, 60),
      reply({{"condition", {{"properties", {{"mgmt", {{"enum", json::array({"unmethylated"})}}}}}}},
             {"new_parameters",
              {{"mgmt",
                {{"type", "string"}, {"description", "MGMT promoter methylation status."}, {"enum", {"methylated", "unmethylated"}}}}}}},
            250, 60),
      reply({{"condition", {{"properties", {{"recurrent", {{"const", false}}}}}}}, {"new_parameters", json::object()}}, 250, 60),
  });
  json extraction = json::array({reply({{"kps", 60}, {"recurrent", false}, {"mgmt", "methylated"}}, 400, 30)});
  return {{"sequences",
           {{"mine_ontology", ontology},
            {"mine_baf", mining},
            {"score_argument", scores},
            {"formalise_condition", formal},
            {"extract_params", extraction}}}};
}

SelectionCriteria trace_selection() { return {2, true, true}; }

TraceRun run_trace() {
  llm::MockBackend mock(trace_script());
  llm::UsageAccumulator usage;
  llm::Client client(mock, usage);
  TraceRun run;
  ConstructionOptions options;
  options.on_rejected_edge = [&](const RejectedEdge& e) { run.rejected.push_back(e); };
  run.ontology = construct_ontology(trace_corpus(), llm_ontology_miner(client), options);
  run.options = select_options(run.ontology, trace_selection());
  run.built = build_general_qbafs(run.ontology, run.options, MiningConfig{}, client);
  run.inference = infer_case(run.built.frameworks, run.built.schema, kTraceCase, client);
  run.usage = usage.report();
  for (const auto& r : mock.captured()) run.tasks.push_back(r.task);
  return run;
}

void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : docs) {
    for (const auto& c : d.chunks) {
      out += json{{"doc_id", d.id}, {"chunk_id", c.id}, {"ordinal", c.ordinal}, {"text", c.text}}.dump() + "\n";
    }
  }
  write_file_atomic(path, out);
}

}  // namespace fixtures
