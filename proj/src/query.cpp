#include "sia/query.hpp"

#include <algorithm>

#include "sia/store.hpp"
#include "sia/validation.hpp"

namespace sia {

namespace {

ResultItem to_item(const IndexHit& hit) {
    ResultItem item;
    item.id = hit.id;
    // kind strings in the index were written from KindTag values
    item.kind = parse_kind_tag(hit.kind).value_or(KindTag::photo);
    item.title = hit.title;
    item.thumbnail = hit.thumbnail;
    return item;
}

bool contains(const std::vector<std::string>& terms, const std::string& term) {
    return std::find(terms.begin(), terms.end(), term) != terms.end();
}

}  // namespace

std::size_t clamp_limit(std::size_t limit) { return std::min(limit, kMaxPageLimit); }

Result<FacetMap> QueryEngine::list_facets() const {
    auto state = store_.state();
    FacetMap facets;
    for (const auto& v : state->reference.vocabularies) facets[v.facetName] = v.terms;

    auto kinds = store_.index().distinct_kinds();
    if (!kinds) return std::move(kinds).error();
    facets[std::string(kKindFacet)] = std::move(*kinds);

    auto& places = facets[std::string(kPlaceFacet)];
    for (const auto& p : state->reference.places) places.push_back(p.id);
    std::sort(places.begin(), places.end());

    std::vector<const Period*> periods;
    for (const auto& p : state->reference.periods) periods.push_back(&p);
    std::sort(periods.begin(), periods.end(), [](const Period* a, const Period* b) {
        return std::tie(a->startYear, a->id) < std::tie(b->startYear, b->id);
    });
    auto& period_ids = facets[std::string(kPeriodFacet)];
    for (const auto* p : periods) period_ids.push_back(p->id);

    if (state->reference.find_vocabulary(kAuthorFacet) == nullptr) {
        auto authors = store_.index().distinct_authors();
        if (!authors) return std::move(authors).error();
        facets[std::string(kAuthorFacet)] = std::move(*authors);
    }
    if (!facets.count(std::string(kSubjectFacet))) facets[std::string(kSubjectFacet)] = {};
    return facets;
}

Result<IndexFilter> QueryEngine::resolve(const QuerySpec& spec) const {
    auto state = store_.state();
    const auto& ref = state->reference;
    std::vector<Violation> problems;
    IndexFilter filter;
    filter.includeArchived = spec.includeArchived;
    for (auto k : spec.kinds) filter.kinds.insert(std::string(to_string(k)));

    if (!spec.placeIds.empty()) {
        std::set<std::string> expanded;
        for (const auto& id : spec.placeIds) {
            auto below = place_descendants(id, ref.places);
            if (!below) {
                problems.push_back({"placeIds", "unknown-place", "unknown place '" + id + "'"});
                continue;
            }
            expanded.insert(below->begin(), below->end());
        }
        filter.placeIds = std::move(expanded);
    }

    if (spec.epochInterval) {
        auto [lo, hi] = *spec.epochInterval;
        if (lo > hi) {
            problems.push_back({"epochInterval", "invalid-interval",
                                "interval start " + std::to_string(lo) + " is after its end " +
                                    std::to_string(hi)});
        } else {
            std::set<std::string> overlapping;
            for (const auto& p : ref.periods)
                if (auto hit = period_overlaps(p, lo, hi); hit && *hit) overlapping.insert(p.id);
            filter.periodIds = std::move(overlapping);
        }
    }

    const Vocabulary* subject = ref.find_vocabulary(kSubjectFacet);
    for (const auto& kw : spec.keywords) {
        if (subject == nullptr || !contains(subject->terms, kw))
            problems.push_back({"keywords", "unknown-term", "'" + kw + "' is not in the subject vocabulary"});
    }
    filter.keywords = spec.keywords;

    if (spec.author) {
        bool known = false;
        if (const Vocabulary* authors = ref.find_vocabulary(kAuthorFacet)) {
            known = contains(authors->terms, *spec.author);
        } else {
            auto all = store_.index().distinct_authors();
            if (!all) return std::move(all).error();
            known = contains(*all, *spec.author);
        }
        if (!known) problems.push_back({"author", "unknown-term", "'" + *spec.author + "' is not a known author"});
        filter.author = spec.author;
    }

    if (!problems.empty()) {
        Error e = make_error(ErrorCode::invalid_spec, "query specification is invalid");
        e.violations = std::move(problems);
        return e;
    }
    return filter;
}

Result<ResultPage> QueryEngine::run(const IndexFilter& filter, std::size_t offset, std::size_t limit) const {
    limit = clamp_limit(limit);
    auto page = store_.index().search(filter, offset, limit);
    if (!page) return std::move(page).error();
    ResultPage out;
    out.total = page->total;
    out.offset = offset;
    out.limit = limit;
    for (const auto& hit : page->items) out.items.push_back(to_item(hit));
    return out;
}

Result<ResultPage> QueryEngine::search(const QuerySpec& spec, std::size_t offset, std::size_t limit) const {
    auto filter = resolve(spec);
    if (!filter) return std::move(filter).error();
    return run(*filter, offset, limit);
}

Result<ResultPage> QueryEngine::browse_by_history(const std::string& periodId, std::size_t offset,
                                                  std::size_t limit) const {
    if (store_.state()->reference.find_period(periodId) == nullptr)
        return make_error(ErrorCode::unknown_period, "unknown period '" + periodId + "'");
    IndexFilter filter;
    filter.periodIds = std::set<std::string>{periodId};
    return run(filter, offset, limit);
}

Result<ResultPage> QueryEngine::browse_by_place(const std::string& placeId, std::size_t offset,
                                                std::size_t limit) const {
    auto below = place_descendants(placeId, store_.state()->reference.places);
    if (!below) return std::move(below).error();
    IndexFilter filter;
    filter.placeIds = std::move(*below);
    return run(filter, offset, limit);
}

Result<ResultPage> QueryEngine::related_documents(const std::string& recordId, std::size_t limit) const {
    if (auto rec = store_.read(recordId); !rec) return std::move(rec).error();
    auto scored = store_.index().related(recordId, weights_);
    if (!scored) return std::move(scored).error();
    ResultPage out;
    out.limit = clamp_limit(limit);
    out.total = scored->size();
    for (std::size_t i = 0; i < scored->size() && i < out.limit; ++i) {
        auto item = to_item((*scored)[i].hit);
        item.score = (*scored)[i].score;
        out.items.push_back(std::move(item));
    }
    return out;
}

}  // namespace sia
