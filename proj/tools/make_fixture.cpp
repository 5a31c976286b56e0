// Generates the synthetic fixture: 200 images across 10 scene themes, chosen
// responses describing each image through 8 content slots, a content lexicon,
// a 500-entry vocabulary, and a completion table that fills the masked slots
// of each response with the slot words of every retrieved image.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "realign/knowledge_base.hpp"
#include "realign/mask_engine.hpp"
#include "realign/raem_io.hpp"
#include "realign/run_config.hpp"

namespace fs = std::filesystem;
using namespace realign;

namespace {

constexpr std::size_t kImagesPerTheme = 5;
constexpr std::size_t kEmbeddingDim = 64;
constexpr std::size_t kVocabSize = 500;
constexpr std::size_t kTopK = 10;
constexpr std::uint64_t kSeed = 20250101;
constexpr std::size_t kSamples = 200;
constexpr double kThemeWeight = 2.0;
constexpr double kWordWeight = 1.0;
constexpr double kNoise = 0.5;
// Chance that a completion fills a slot with the theme's typical word instead
// of the retrieved image's word.
constexpr double kPrior = 0.5;
constexpr std::size_t kMaxPerturb = 6;

struct Theme {
    const char* name;
    std::array<const char*, 12> objects;
};

const std::array<Theme, 10> kThemes = {{
    {"kitchen", {"cup", "plate", "kettle", "toaster", "fridge", "spoon", "bowl", "pan", "sink", "oven", "teapot", "jar"}},
    {"beach", {"umbrella", "towel", "surfboard", "bucket", "shell", "sandcastle", "kite", "cooler", "lifeguard", "sunhat", "crab", "canoe"}},
    {"street", {"car", "bus", "bicycle", "lamppost", "hydrant", "sign", "taxi", "bench", "pedestrian", "truck", "scooter", "mailbox"}},
    {"park", {"swing", "slide", "fountain", "tree", "dog", "frisbee", "stroller", "squirrel", "pond", "basket", "kiosk", "jogger"}},
    {"office", {"desk", "laptop", "monitor", "chair", "printer", "keyboard", "stapler", "lamp", "folder", "whiteboard", "phone", "plant"}},
    {"bedroom", {"bed", "pillow", "blanket", "wardrobe", "mirror", "rug", "nightstand", "curtain", "clock", "dresser", "slipper", "cat"}},
    {"farm", {"tractor", "barn", "cow", "horse", "chicken", "fence", "haystack", "pig", "sheep", "goat", "silo", "wagon"}},
    {"harbor", {"boat", "anchor", "rope", "crane", "ship", "buoy", "dock", "net", "seagull", "container", "lighthouse", "sailor"}},
    {"forest", {"deer", "mushroom", "log", "fern", "owl", "stream", "rock", "fox", "trail", "pinecone", "hiker", "moss"}},
    {"zoo", {"elephant", "giraffe", "lion", "zebra", "monkey", "penguin", "keeper", "cage", "tiger", "bear", "flamingo", "parrot"}},
}};

const std::vector<std::string> kAttributes = {
    "red",    "blue",   "green",   "yellow",  "white",   "black",   "brown",  "gray",  "orange",  "purple",
    "pink",   "small",  "large",   "tiny",    "huge",    "tall",    "short",  "wooden", "metal",  "plastic",
    "ceramic", "leather", "stone", "old",     "new",     "shiny",   "dusty",  "striped", "round", "square",
    "bright", "dark",   "wet",     "dry",     "broken",  "empty",   "full",   "soft",  "colorful", "rusty"};

const std::vector<std::string> kRelations = {"on",     "under",   "beside", "behind", "near",  "above",
                                             "below",  "inside",  "against", "across", "along", "around",
                                             "over",   "beneath", "atop",   "by"};

const std::vector<std::string> kInstructions = {
    "Describe this image in detail.",
    "What is happening in this picture?",
    "Explain the scene shown in the image.",
    "Give a short description of the photo.",
    "What can you see in this image?",
};

// Slot order: A1 O1 R1 O2 A2 O3 R2 O4.
enum Slot { A1, O1, R1, O2, A2, O3, R2, O4, kSlots };
constexpr std::array<SpanKind, kSlots> kSlotKinds = {SpanKind::Attribute, SpanKind::Object, SpanKind::Relation,
                                                      SpanKind::Object,    SpanKind::Attribute, SpanKind::Object,
                                                      SpanKind::Relation,  SpanKind::Object};

using Slots = std::array<std::string, kSlots>;

std::string render_template(int tmpl, const std::string& theme, const Slots& s) {
    switch (tmpl) {
        case 0:
            return fmt::format("The image shows a {} {} {} the {} in a {}. A {} {} is {} the {}. Overall the {} scene looks calm and well lit.",
                               s[A1], s[O1], s[R1], s[O2], theme, s[A2], s[O3], s[R2], s[O4], theme);
        case 1:
            return fmt::format("In this {} picture, a {} {} sits {} the {}. Nearby, a {} {} rests {} the {}. The lighting suggests it was taken during the day.",
                               theme, s[A1], s[O1], s[R1], s[O2], s[A2], s[O3], s[R2], s[O4]);
        default:
            return fmt::format("This photo captures a {} where a {} {} is placed {} the {}. There is also a {} {} {} the {}. The composition feels natural and balanced.",
                               theme, s[A1], s[O1], s[R1], s[O2], s[A2], s[O3], s[R2], s[O4]);
    }
}

std::string unmaskable_response(const std::string& theme) {
    return fmt::format("It is difficult to describe this {} scene with confidence.", theme);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    double gaussian() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    std::vector<double> gaussian_vector(std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = gaussian();
        return v;
    }

private:
    std::mt19937_64 engine_;
};

struct Image {
    std::string id;
    std::size_t theme;
    int tmpl;
    Slots slots;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <output-dir>\n";
        return 2;
    }
    const fs::path out = argv[1];
    fs::create_directories(out);
    Rng rng(kSeed);

    // Theme canonical descriptions; images perturb 0..5 slots of their theme's canonical.
    std::vector<Slots> canonical;
    for (const auto& theme : kThemes) {
        const auto& pool = theme.objects;
        Slots s;
        std::set<std::string> used;
        for (int slot = 0; slot < kSlots; ++slot) {
            if (kSlotKinds[slot] == SpanKind::Object) {
                std::string o;
                do o = pool[rng.index(pool.size())]; while (used.contains(o));
                used.insert(o);
                s[slot] = o;
            } else if (kSlotKinds[slot] == SpanKind::Attribute) {
                s[slot] = kAttributes[rng.index(kAttributes.size())];
            } else {
                s[slot] = kRelations[rng.index(kRelations.size())];
            }
        }
        canonical.push_back(s);
    }

    std::vector<Image> images;
    for (std::size_t i = 0; i < kThemes.size() * kImagesPerTheme; ++i) {
        const std::size_t t = i % kThemes.size();
        Image img{fmt::format("img{:03}", i), t, static_cast<int>(rng.index(3)), canonical[t]};
        const std::size_t perturb = rng.index(kMaxPerturb);
        for (std::size_t p = 0; p < perturb; ++p) {
            const int slot = static_cast<int>(rng.index(kSlots));
            if (kSlotKinds[slot] == SpanKind::Object) {
                std::set<std::string> used;
                for (int s = 0; s < kSlots; ++s) {
                    if (kSlotKinds[s] == SpanKind::Object) used.insert(img.slots[s]);
                }
                std::string o;
                do o = kThemes[t].objects[rng.index(kThemes[t].objects.size())]; while (used.contains(o));
                img.slots[slot] = o;
            } else if (kSlotKinds[slot] == SpanKind::Attribute) {
                img.slots[slot] = kAttributes[rng.index(kAttributes.size())];
            } else {
                img.slots[slot] = kRelations[rng.index(kRelations.size())];
            }
        }
        images.push_back(std::move(img));
    }

    // Embeddings: strong theme direction plus one vector per slot word, plus noise.
    std::map<std::string, std::vector<double>> word_vec;
    auto vec_for = [&](const std::string& w) -> const std::vector<double>& {
        auto it = word_vec.find(w);
        if (it == word_vec.end()) it = word_vec.emplace(w, rng.gaussian_vector(kEmbeddingDim)).first;
        return it->second;
    };
    std::vector<std::vector<double>> theme_vec;
    for (std::size_t t = 0; t < kThemes.size(); ++t) theme_vec.push_back(rng.gaussian_vector(kEmbeddingDim));

    EmbeddingFile emb;
    emb.dim = kEmbeddingDim;
    std::vector<std::string> ids;
    for (const auto& img : images) {
        std::vector<double> e(kEmbeddingDim, 0.0);
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) e[d] = kThemeWeight * theme_vec[img.theme][d] + kNoise * rng.gaussian();
        for (const auto& w : img.slots) {
            const auto& v = vec_for(w);
            for (std::size_t d = 0; d < kEmbeddingDim; ++d) e[d] += kWordWeight * v[d];
        }
        for (double x : e) emb.values.push_back(static_cast<float>(x));
        ids.push_back(img.id);
    }
    write_embeddings(out / "images.raem", emb);
    write_ids(out / "images.ids", ids);

    // Lexicon.
    ContentLexicon lexicon;
    {
        std::ofstream lex(out / "lexicon.tsv", std::ios::binary);
        lex << "# word<TAB>kind\n";
        for (const auto& theme : kThemes) {
            for (const char* o : theme.objects) {
                lex << o << "\tobject\n";
                lexicon.add(o, SpanKind::Object);
            }
        }
        for (const auto& a : kAttributes) {
            lex << a << "\tattribute\n";
            lexicon.add(a, SpanKind::Attribute);
        }
        for (const auto& r : kRelations) {
            lex << r << "\trelation\n";
            lexicon.add(r, SpanKind::Relation);
        }
    }

    // Manifest: every image is asked several different questions; every 20th
    // sample gets a response with nothing maskable.
    std::vector<Sample> samples;
    std::vector<bool> sample_maskable;
    for (std::size_t i = 0; i < kSamples; ++i) {
        const auto& img = images[i % images.size()];
        const std::string theme = kThemes[img.theme].name;
        const bool maskable = (i % 20) != 19;
        sample_maskable.push_back(maskable);
        samples.push_back({fmt::format("s{:03}", i), kInstructions[(i / images.size() + img.theme) % kInstructions.size()], img.id,
                           maskable ? render_template(img.tmpl, theme, img.slots) : unmaskable_response(theme)});
    }
    write_manifest(out / "manifest.tsv", samples);

    // Completion table: sample x rank -> the sample's template filled with the
    // retrieved image's slot words.
    const KnowledgeBase kb = build_index(zip_items(emb, ids));
    const MaskStrategy strategy;  // segment level, 0.5 budget
    std::ofstream comp(out / "completions.tsv", std::ios::binary);
    comp << "sample_id\trank\tcompletion\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& img = images[i % images.size()];
        if (!sample_maskable[i]) continue;
        const auto masked = mask_segments(samples[i].chosen, lexicon, strategy);
        if (masked.spans.size() != kSlots) {
            std::cerr << "fixture invariant broken: " << samples[i].sample_id << " has " << masked.spans.size() << " spans\n";
            return 1;
        }
        for (const auto& n : retrieve_top_k(kb, img.id, kTopK)) {
            const auto& other = images[*kb.index_of(n.item_id)];
            Slots fill = other.slots;
            for (int slot = 0; slot < kSlots; ++slot) {
                if (rng.uniform() < kPrior) fill[slot] = canonical[img.theme][slot];
            }
            comp << samples[i].sample_id << '\t' << n.rank << '\t'
                 << render_template(img.tmpl, kThemes[img.theme].name, fill) << '\n';
        }
    }

    // Vocabulary: reserved id 0, then every word the fixture can emit, padded.
    std::set<std::string> words;
    auto add_words = [&](const std::string& text) {
        for (const auto& r : word_tokens(text)) words.insert(ascii_lower(r.in(text)));
    };
    for (const auto& s : samples) {
        add_words(s.instruction);
        add_words(s.chosen);
    }
    for (const auto& [w, kind] : lexicon.entries()) add_words(w);
    for (int tmpl = 0; tmpl < 3; ++tmpl) add_words(render_template(tmpl, "", Slots{}));
    for (const auto& t : kThemes) add_words(unmaskable_response(t.name));
    if (words.size() + 1 > kVocabSize) {
        std::cerr << "vocabulary overflow: " << words.size() << " words\n";
        return 1;
    }
    {
        std::ofstream vocab(out / "vocab.txt", std::ios::binary);
        vocab << "<unk>\n";
        for (const auto& w : words) vocab << w << '\n';
        for (std::size_t i = words.size() + 1; i < kVocabSize; ++i) vocab << fmt::format("<reserved_{:03}>\n", i);
    }

    RunConfig cfg;
    cfg.seed = 7;
    cfg.lr = 0.1;
    cfg.embedding_source = "synthetic";
    {
        std::ofstream conf(out / "fixture.conf", std::ios::binary);
        conf << "# Fixture run: library defaults except the toy-scale learning rate.\n" << render_run_config(cfg);
    }

    fmt::print("wrote {} images, {} samples, {} lexicon entries, {} vocabulary words to {}\n", images.size(), samples.size(),
               lexicon.size(), words.size() + 1, out.string());
    return 0;
}
