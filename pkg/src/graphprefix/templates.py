"""Deterministic node-description templates and the fixed text inventory.

All prose that can ever appear in a generated dataset lives here: template
variants, attribute pools, instruction and response patterns.  The word
tokenizer builds its vocabulary from this inventory, so generated text is
guaranteed to encode, and the whole pipeline stays hermetic (no external
text model in the loop).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

TASKS = ("substructure_counting", "maximum_triplet_sum", "shortest_path", "bipartite_matching")

# -- attribute pools ------------------------------------------------------

ELEMENTS = {
    "C": ("Carbon", 6, 12),
    "O": ("Oxygen", 8, 16),
    "N": ("Nitrogen", 7, 14),
    "H": ("Hydrogen", 1, 1),
    "S": ("Sulfur", 16, 32),
}

FIRST_NAMES = (
    "Wilma", "Manuel", "Cornelia", "Travis", "Adam", "Ruth", "Victor", "Elena",
    "Marcus", "Sylvia", "Oscar", "Ingrid", "Felix", "Norma", "Hugo", "Clara",
    "Dmitri", "Paula", "Ernest", "Lydia", "Roland", "Bianca", "Gordon", "Astrid",
)

LAST_NAMES = (
    "Lyons", "Cornelius", "Brooks", "Wight", "Lamarr", "Holloway", "Pratt",
    "Vega", "Stein", "Moreau", "Falk", "Barnes", "Quinn", "Sandoval", "Ferris",
    "Okafor", "Lindgren", "Hale", "Mercer", "Boyd", "Keller", "Novak", "Ramos", "Thorne",
)

GALAXIES = (
    "Whirlpool Galaxy", "Horsehead Nebula", "Large Magellanic Cloud",
    "Pelican Nebula", "Needle Galaxy", "Sombrero Galaxy", "Pinwheel Galaxy",
    "Cartwheel Galaxy", "Tadpole Galaxy", "Cigar Galaxy", "Sunflower Galaxy",
    "Butterfly Nebula", "Eagle Nebula", "Orion Nebula", "Crab Nebula",
    "Triangulum Galaxy", "Andromeda Galaxy", "Small Magellanic Cloud",
)

ROLES = (
    "software engineer", "data analyst", "urban planner", "graphic designer",
    "civil engineer", "marketing manager", "school teacher", "registered nurse",
    "financial auditor", "landscape architect", "laboratory technician",
    "customer support specialist",
)

AGE_POOL = tuple(range(20, 95, 5))          # person ages
COST_POOL = tuple(range(10, 70, 10))        # wormhole activation costs
DISTANCE_POOL = tuple(range(500, 10000, 100))
SALARY_POOL = tuple(range(30000, 91000, 1000))
HOURS_POOL = tuple(range(30, 46))
RADIUS_POOL = tuple(range(30, 185, 5))      # covalent radius, picometers
BOND_POOL = (1, 2, 3, 4)

# Integers the tokenizer must know as single tokens.  Covers node indices,
# counts, ages, costs, hours, and every answer the oracles can produce at
# supported sizes (triplet sums are multiples of 5, path sums multiples
# of 10).
_NUMBER_SET = (
    set(range(0, 121))
    | set(range(125, 305, 5))
    | set(range(310, 3010, 10))
    | set(DISTANCE_POOL)
    | set(SALARY_POOL)
)
NUMBER_TOKENS = sorted(_NUMBER_SET)

PUNCTUATION = (".", ",", ":", ";", "?", "!", "-", "—", "(", ")", "%")


# -- description templates -------------------------------------------------


@dataclass(frozen=True)
class DescriptionTemplate:
    """A pool of format-string variants for one task's node descriptions.

    ``slots`` are attribute placeholders the caller must supply; ``fillers``
    are prose placeholders drawn from this template's own pools with the
    provided rng, giving phrasing variety without leaving the fixed
    vocabulary.
    """

    task: str
    slots: tuple[str, ...]
    variants: tuple[str, ...]
    fillers: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def render(self, attrs: dict, rng: np.random.Generator) -> str:
        variant = self.variants[int(rng.integers(len(self.variants)))]
        values = dict(attrs)
        for name, pool in self.fillers.items():
            values[name] = pool[int(rng.integers(len(pool)))]
        needed = set(re.findall(r"{(\w+)}", variant))
        missing = needed - set(values)
        if missing:
            raise KeyError(f"template for {self.task}: missing slots {sorted(missing)}")
        return variant.format(**values)


def render_description(template: DescriptionTemplate, attrs: dict,
                       rng: np.random.Generator) -> str:
    return template.render(attrs, rng)


ATOM_TEMPLATE = DescriptionTemplate(
    task="substructure_counting",
    slots=("name", "symbol", "z", "mass", "radius", "bonds"),
    variants=(
        "The {name} atom has an atomic number of {z}, denoted by the symbol {symbol}. "
        "{name} has a covalent radius of approximately {radius} picometers. In this "
        "molecule the {name} atom typically forms {bonds} chemical bonds with its "
        "neighboring atoms here, and its standard atomic weight is close to {mass} units.",

        "This atom is {name}, written with the symbol {symbol} and carrying atomic "
        "number {z}. Its covalent radius measures about {radius} picometers, its "
        "atomic weight is near {mass} units, and within this particular molecule it "
        "usually participates in {bonds} separate chemical bonds with the other atoms "
        "directly adjacent to it.",

        "Here we have a {name} atom, whose chemical symbol is {symbol}. The atomic "
        "number of {name} is {z} and its atomic weight is roughly {mass} units. It "
        "shows a measured covalent radius of around {radius} picometers and tends to "
        "form about {bonds} strong chemical bonds inside this one particular molecule.",

        "A {name} atom appears at this position, abbreviated as {symbol} in standard "
        "chemical notation. It holds atomic number {z}, weighs about {mass} atomic "
        "units, exhibits a measured covalent radius near {radius} picometers, and "
        "ordinarily makes around {bonds} stable chemical bonds with the atoms around it "
        "in this molecule.",

        "The element at this node is {name}, with standard symbol {symbol} and atomic "
        "number {z}. Common reference tables list its atomic weight at about {mass} "
        "units and its covalent radius at roughly {radius} picometers in most cases; "
        "it also commonly forms {bonds} chemical bonds in molecular structures like "
        "this one.",

        "Chemists usually denote this {name} atom by the symbol {symbol}. It has "
        "atomic number {z}, an approximate atomic weight of {mass} units, and a "
        "measured covalent radius of about {radius} picometers. Within the present "
        "molecule it generally forms {bonds} separate chemical bonds with several of "
        "the closest nearby atoms.",

        "This position holds a {name} atom, chemical symbol {symbol}, atomic number "
        "{z}. The measured covalent radius is close to {radius} picometers and the "
        "standard atomic weight is listed near {mass} units; the atom customarily "
        "supports about {bonds} chemical bonds in most common organic molecules of "
        "this same general kind.",

        "An atom of {name} sits here, recognized in notation by the symbol {symbol}. "
        "Carrying atomic number {z} and a standard atomic weight of about {mass} "
        "units, it presents a covalent radius of nearly {radius} picometers and "
        "typically engages in {bonds} stable chemical bonds with its immediate "
        "neighbors in the molecule.",
    ),
)


_PERSON_TRAITS = (
    "With a colorful style and an unconventional fashion sense, this person stands "
    "out as a true original among friends.",
    "An adventurous spirit and a love for the outdoors mean this person is always "
    "ready to explore new places and experiences.",
    "A contagious enthusiasm and a steady supply of energy inspire the people "
    "nearby to take on their own ambitious projects.",
    "An unassuming nature and genuine humility create a calm and welcoming "
    "environment for everyone in the circle.",
    "A sharp wit and a fondness for long conversations make this person the "
    "natural center of any gathering of friends.",
    "Quiet determination and a careful eye for detail show up in everything this "
    "person decides to take on.",
    "A deep love of books and music fills this person's evenings, and friends "
    "often drop by to borrow recommendations.",
    "Years of volunteering at the local community garden have given this person a "
    "wide and loyal network of companions.",
    "A practical mind and a patient manner make this person the first one friends "
    "call when plans start to fall apart.",
    "An easy laugh and a generous habit of sharing meals keep this person's "
    "kitchen table crowded on weekends.",
)

_PERSON_EXTRAS = (
    "On weekend mornings they like to walk the long road by the river before town "
    "wakes up.",
    "They once spent a whole summer repairing an old sailboat with two close friends.",
    "Most evenings end with tea, a crossword, and a phone call to an old friend.",
    "Coworkers say the office feels noticeably calmer whenever they are around for "
    "the day.",
    "They keep an old bicycle in fine working order and ride it in every season.",
    "A shelf of travel photographs in the hall records thirty years of curious trips.",
    "The neighbors trade fresh bread for the honey that comes from their two "
    "backyard hives.",
    "They can name every bird that visits the feeder outside the kitchen window "
    "each morning.",
    "Nothing pleases them more than fixing a thing everyone else had given up on.",
    "Their favorite chair sits by the window where the afternoon light is best for "
    "reading.",
)

PERSON_TEMPLATE = DescriptionTemplate(
    task="maximum_triplet_sum",
    slots=("name", "age"),
    variants=(
        "This is {name}, and they are {age} years old. {trait} {extra}",
        "Meet {name}, who is {age} years of age. {trait} {extra}",
        "Their name is {name}, and they are {age} years old. {trait} {extra}",
        "{name} is {age} years old. {trait} Friends describe them as dependable. {extra}",
        "Here is {name}, aged {age}. {trait} Neighbors know them well. {extra}",
        "This person is called {name} and is {age} years old. {trait} {extra}",
        "Say hello to {name}, {age} years old. {trait} They enjoy quiet mornings. {extra}",
        "The person described here is {name}, who recently turned {age}. {trait} {extra}",
    ),
    fillers={"trait": _PERSON_TRAITS, "extra": _PERSON_EXTRAS},
)


_WORMHOLE_NOTES = (
    "Its beacon signal is easy to track from most of the nearby relay stations today.",
    "Long range survey probes have confirmed the same reading twice in the past ten "
    "years.",
    "Experienced survey crews rate this passage as fully stable across all standard "
    "travel conditions.",
    "The region surrounding the gate is quiet and mostly free of drifting stray "
    "debris.",
    "Current charts mark the site clearly for any vessel that passes through this "
    "sector.",
    "Navigators consider the final approach simple compared with most other routes "
    "in the area.",
    "Distant observation posts report a steady glow that stays visible from a great "
    "distance.",
    "Its recorded position has drifted very little since the earliest charts were "
    "first drawn.",
)

WORMHOLE_TEMPLATE = DescriptionTemplate(
    task="shortest_path",
    slots=("index", "galaxy", "distance", "cost"),
    variants=(
        "It is wormhole {index}, and it is located in the {galaxy}. This wormhole is "
        "about {distance} light-years away from Earth and requires {cost} pounds of "
        "dark matter to activate. {note}",

        "This is wormhole {index}, found in the {galaxy}. It sits roughly {distance} "
        "light-years away from planet Earth, and fully activating it requires about "
        "{cost} pounds of dark matter. {note}",

        "Wormhole {index} lies in the {galaxy}, approximately {distance} light-years "
        "away from Earth as currently measured. Each activation of this wormhole "
        "consumes a full {cost} pounds of refined dark matter. {note}",

        "Here is wormhole {index}, situated in the {galaxy} about {distance} "
        "light-years from Earth by current estimates. Opening it safely for travel "
        "requires at least {cost} pounds of dark matter. {note}",

        "The wormhole numbered {index} belongs to the {galaxy}. Its measured "
        "distance from Earth is near {distance} light-years, and it always needs "
        "{cost} full pounds of dark matter to activate. {note}",

        "Wormhole {index} can be reached out in the {galaxy}, some {distance} "
        "light-years away from Earth. It takes exactly {cost} pounds of processed "
        "dark matter to bring it fully online. {note}",

        "Official records place wormhole {index} inside the {galaxy}, at a distance "
        "of about {distance} light-years from Earth. Activating the passage reliably "
        "costs around {cost} pounds of pure dark matter. {note}",

        "This entry covers wormhole {index}, charted deep within the {galaxy} "
        "roughly {distance} light-years from Earth. The gate always demands a full "
        "{cost} pounds of dark matter for each activation. {note}",
    ),
    fillers={"note": _WORMHOLE_NOTES},
)


_APPLICANT_NOTES = (
    "They find peace in practicing meditation and mindfulness most evenings.",
    "They spend free weekends hiking the hill trails outside town.",
    "They keep a small workshop at home for woodworking projects.",
    "They enjoy cooking large dinners for family and close friends.",
    "They coach a neighborhood youth team during the spring season.",
    "They collect old maps and enjoy studying how cities change.",
    "They play the piano and perform at small local events sometimes.",
    "They tend a vegetable garden that supplies half the street.",
)

APPLICANT_TEMPLATE = DescriptionTemplate(
    task="bipartite_matching",
    slots=("name", "age", "role"),
    variants=(
        "This is {name}, and they are {age} years old. They want to find a job. "
        "They work as a {role} and take real pride in the craft. {note}",

        "Meet {name}, aged {age}, who wants to find a job. Their background is as a "
        "{role} with several seasons of steady practice. {note}",

        "{name} is {age} years old and wants to find a job. Trained as a {role}, "
        "they bring careful habits to every task. {note}",

        "Here is {name}, {age} years old, currently looking for a job. They have "
        "worked as a {role} for most of their career. {note}",

        "The applicant is {name}, age {age}, searching for a job. As a {role} they "
        "are known for being reliable and quick to learn. {note}",

        "This applicant is called {name} and is {age} years old. They hope to find "
        "a job soon. Their experience is as a {role}. {note}",

        "Say hello to {name}, {age} years old and eager to find a job. They built "
        "their skills working as a {role}. {note}",

        "{name}, aged {age}, wants to find a job. A {role} by training, they keep "
        "their references current and their schedule open. {note}",
    ),
    fillers={"note": _APPLICANT_NOTES},
)


_JOB_NOTES = (
    "We want applicants with related experience in a similar role.",
    "We prefer candidates who can start within one calendar month.",
    "We welcome applicants who enjoy steady teamwork every single day.",
    "We expect careful written reports at the end of every week.",
    "We offer fully paid training during the first two months.",
    "We value punctuality and clear communication above everything else.",
    "We support flexible scheduling whenever the seasonal workload allows it.",
    "We review every application within ten business days of receipt.",
)

JOB_TEMPLATE = DescriptionTemplate(
    task="bipartite_matching_job",
    slots=("role", "salary", "hours"),
    variants=(
        "The position is for a {role}. The average salary for a year is {salary} "
        "dollars, and it needs to work {hours} hours every week. {note}",

        "This opening seeks a skilled {role}. Yearly pay averages about {salary} "
        "dollars with {hours} full hours of work expected every single week. {note}",

        "A dependable {role} is needed for this job. It pays about {salary} dollars "
        "a year and requires roughly {hours} hours each week. {note}",

        "We are hiring a qualified {role}. The annual salary is near {salary} "
        "dollars, and the schedule runs {hours} hours per week. {note}",

        "This job posting is for a full time {role} position. Total compensation "
        "averages {salary} dollars yearly across about {hours} weekly scheduled "
        "hours. {note}",

        "The role on offer here is {role}. Expect around {salary} dollars a year "
        "for about {hours} hours of steady work per week. {note}",

        "An opening currently exists for a {role}. The base salary averages "
        "{salary} dollars each year, with about {hours} hours required weekly. {note}",

        "Candidates are sought for a regular {role} job. It provides about {salary} "
        "dollars annually and asks for roughly {hours} hours a week. {note}",
    ),
    fillers={"note": _JOB_NOTES},
)


TEMPLATES = {
    "substructure_counting": ATOM_TEMPLATE,
    "maximum_triplet_sum": PERSON_TEMPLATE,
    "shortest_path": WORMHOLE_TEMPLATE,
    "bipartite_matching": APPLICANT_TEMPLATE,
    "bipartite_matching_job": JOB_TEMPLATE,
}

# Token-count ranges every rendered description must land in, per task.
DESCRIPTION_TOKEN_RANGES = {
    "substructure_counting": (52, 59),
    "maximum_triplet_sum": (39, 82),
    "shortest_path": (48, 58),
    "bipartite_matching": (34, 61),
}


# -- instructions and responses --------------------------------------------

INSTRUCTIONS = {
    "substructure_counting":
        "How many carbon-carbon-oxygen triangles containing Atom {anchor} are in the molecule?",
    "maximum_triplet_sum":
        "What is the maximum sum of age of a triplet composed of Person {anchor}, "
        "their friends and friends of those friends?",
    "shortest_path":
        "Starting from Wormhole {source}, how much dark matter do we need at the "
        "minimum to reach Wormhole {target}?",
    "bipartite_matching":
        "Each job can only accept one applicant and a job applicant can be appointed "
        "for only one job. At most how many applicants can find the job they are "
        "interested in?",
}

RESPONSES = {
    "substructure_counting": "The number of such triangles is {answer}.",
    "maximum_triplet_sum": "The maximum triplet sum is {answer}.",
    "shortest_path": "The minimum amount of dark matter required is {answer}.",
    "bipartite_matching": "The maximum number of matched applicants is {answer}.",
}


def instruction_text(task: str, anchors: tuple[int, ...]) -> str:
    """Render the task instruction with 1-based node references."""
    if task == "substructure_counting":
        return INSTRUCTIONS[task].format(anchor=anchors[0] + 1)
    if task == "maximum_triplet_sum":
        return INSTRUCTIONS[task].format(anchor=anchors[0] + 1)
    if task == "shortest_path":
        return INSTRUCTIONS[task].format(source=anchors[0] + 1, target=anchors[1] + 1)
    if task == "bipartite_matching":
        return INSTRUCTIONS[task]
    raise ValueError(f"unknown task: {task}")


def response_text(task: str, answer: int) -> str:
    return RESPONSES[task].format(answer=answer)


# -- vocabulary inventory ---------------------------------------------------


def vocabulary_texts() -> list[str]:
    """Every static string the pipeline can emit, for vocabulary harvesting.
    Placeholders are stripped; slot values come from the pools, which are
    included here as strings."""
    texts: list[str] = []
    for tpl in TEMPLATES.values():
        texts.extend(re.sub(r"{\w+}", " ", v) for v in tpl.variants)
        for pool in tpl.fillers.values():
            texts.extend(pool)
    texts.extend(re.sub(r"{\w+}", " ", t) for t in INSTRUCTIONS.values())
    texts.extend(re.sub(r"{\w+}", " ", t) for t in RESPONSES.values())
    for name, _, _ in ELEMENTS.values():
        texts.append(name)
    texts.extend(ELEMENTS.keys())
    texts.extend(FIRST_NAMES)
    texts.extend(LAST_NAMES)
    texts.extend(GALAXIES)
    texts.extend(ROLES)
    # Prompt scaffolding used by the text-serialization baselines.
    from .baselines import SCAFFOLD_TEXTS
    texts.extend(SCAFFOLD_TEXTS)
    texts.extend(PUNCTUATION)
    return texts
