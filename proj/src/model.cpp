#include "ovkit/model.hpp"

#include <algorithm>

namespace ovkit {

const ClassEntry* ParadigmModel::find(ClassId id) const {
    for (const auto& entry : entries) {
        if (entry.class_id == id) {
            return &entry;
        }
    }
    return nullptr;
}

ClassEntry* ParadigmModel::find(ClassId id) {
    for (auto& entry : entries) {
        if (entry.class_id == id) {
            return &entry;
        }
    }
    return nullptr;
}

std::size_t ParadigmModel::position_of(ClassId id) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].class_id == id) {
            return i;
        }
    }
    throw UnknownClass("class " + std::to_string(id) + " is not part of the model");
}

void ParadigmModel::validate() const {
    std::map<ClassId, std::size_t> position;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!position.emplace(entries[i].class_id, i).second) {
            throw DuplicateClass("class " + std::to_string(entries[i].class_id) +
                                 " appears twice in the model");
        }
    }

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ClassEntry& entry = entries[i];
        for (const std::set<ClassId>* s : {&entry.similar, &entry.cannot_be}) {
            for (ClassId id : *s) {
                if (position.find(id) == position.end()) {
                    throw UnknownClass("entry " + std::to_string(entry.class_id) +
                                       " references missing class " + std::to_string(id));
                }
                if (id == entry.class_id) {
                    throw InvalidArgument("entry " + std::to_string(entry.class_id) +
                                          " references itself");
                }
            }
        }
        for (ClassId id : entry.similar) {
            if (entry.cannot_be.count(id) != 0) {
                throw InvalidArgument("class " + std::to_string(id) +
                                      " is both similar and ruled out for entry " +
                                      std::to_string(entry.class_id));
            }
        }
        entry.hyperparams.validate();
    }

    switch (paradigm) {
    case Paradigm::OvR:
        for (const auto& entry : entries) {
            if (!entry.similar.empty() || !entry.cannot_be.empty()) {
                throw InvalidArgument("one-vs-rest entries carry no similarity sets");
            }
        }
        break;
    case Paradigm::OvP:
        for (const auto& entry : entries) {
            if (!entry.similar.empty() || !entry.cannot_be.empty()) {
                throw InvalidArgument("one-vs-previous entries carry no similarity sets");
            }
        }
        if (!entries.empty() && !entries.front().classifier.is_dummy()) {
            throw InvalidArgument("the first one-vs-previous entry must be the dummy");
        }
        break;
    case Paradigm::SCL:
        // similarity is symmetric; ruled-out classes arrived later
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const ClassEntry& entry = entries[i];
            for (ClassId id : entry.similar) {
                if (entries[position.at(id)].similar.count(entry.class_id) == 0) {
                    throw InvalidArgument("similarity between " + std::to_string(entry.class_id) +
                                          " and " + std::to_string(id) + " is not symmetric");
                }
            }
            for (ClassId id : entry.cannot_be) {
                if (position.at(id) <= i) {
                    throw InvalidArgument("entry " + std::to_string(entry.class_id) +
                                          " rules out the earlier class " + std::to_string(id));
                }
            }
            if (entry.classifier.is_dummy() != entry.similar.empty()) {
                throw InvalidArgument("entry " + std::to_string(entry.class_id) +
                                      " must be the dummy exactly when nothing is similar to it");
            }
        }
        break;
    case Paradigm::OvPSC:
        // similarity edges point backward; ruled-out classes arrived later
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const ClassEntry& entry = entries[i];
            for (ClassId id : entry.similar) {
                if (position.at(id) >= i) {
                    throw InvalidArgument("entry " + std::to_string(entry.class_id) +
                                          " lists a later class as similar");
                }
            }
            for (ClassId id : entry.cannot_be) {
                if (position.at(id) <= i) {
                    throw InvalidArgument("entry " + std::to_string(entry.class_id) +
                                          " rules out the earlier class " + std::to_string(id));
                }
            }
        }
        if (!entries.empty() && !entries.front().classifier.is_dummy()) {
            throw InvalidArgument("the first entry must be the dummy");
        }
        break;
    }

    if (!(lambda_sim >= 0.0 && lambda_sim <= 1.0)) {
        throw InvalidArgument("similarity threshold must lie in [0, 1]");
    }
}

} // namespace ovkit
