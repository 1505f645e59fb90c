#!/usr/bin/env python3
"""Regenerates the bundled corpus, reference tables and offline fixtures.

Everything is deterministic: rerunning rewrites byte-identical files.

Non-German translations are pseudo-translations: every English word maps to a
stable pseudo word of the target language, so string matching, alignment and
override handling behave as they would on real output without shipping
machine-translated text. German Hofstede probes carry real translations.
"""

import hashlib
import json
import os
import sys
import unicodedata

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data")

CULTURE = [
    ("ro", "Romania", 428330),
    ("el", "Greece", 207647),
    ("ur", "Pakistan", 168587),
    ("fa", "Iran", 872240),
    ("tl", "Philippines", 43145),
    ("id", "Indonesia", 618395),
    ("de", "Germany", 2675084),
    ("ms", "Malaysia", 356937),
    ("bn", "Bangladesh", 119619),
    ("sr", "Serbia", 656627),
    ("tr", "Turkey", 475984),
    ("vi", "Vietnam", 1270712),
    ("ko", "South Korea", 582977),
]

# pdi, idv, mas, uai, lto, ivr
HOFSTEDE_PUBLISHED = {
    "Germany": (35, 67, 66, 65, 83, 40),
    "Greece": (60, 35, 57, 100, 45, 50),
    "Romania": (90, 30, 42, 90, 52, 20),
    "Pakistan": (55, 14, 50, 70, 50, 0),
    "Iran": (58, 41, 43, 59, 14, 40),
    "Philippines": (94, 32, 64, 44, 27, 42),
    "Indonesia": (78, 14, 46, 48, 62, 38),
    "Malaysia": (100, 26, 50, 36, 41, 57),
    "Bangladesh": (80, 20, 55, 60, 47, 20),
    "Serbia": (86, 25, 43, 92, 52, 28),
    "Turkey": (66, 37, 45, 85, 46, 49),
    "Vietnam": (70, 20, 40, 30, 57, 35),
    "South Korea": (60, 18, 39, 85, 100, 29),
}

DIMENSION_OF_INDEX = {}
for dim, items in {
    "pdi": (2, 7, 20, 23),
    "idv": (1, 4, 6, 9),
    "mas": (3, 5, 8, 10),
    "uai": (15, 18, 21, 24),
    "lto": (13, 14, 19, 22),
    "ivr": (11, 12, 16, 17),
}.items():
    for i in items:
        DIMENSION_OF_INDEX[i] = dim

# ---------------------------------------------------------------- Hofstede

WORK_GOALS = [
    "Having sufficient time for your personal or home life",
    "Having a boss you can respect",
    "Getting recognition for good performance",
    "Having security of employment",
    "Having pleasant people to work with",
    "Doing work that is interesting",
    "Being consulted by your boss in decisions involving your work",
    "Living in a desirable area",
    "Having a job respected by your family and friends",
    "Having chances for promotion",
]
PRIVATE_LIFE = [
    "Keeping time free for fun",
    "Moderation, having few desires,",
    "Doing a service to a friend",
    "Thrift, not spending more than needed,",
]

HOFSTEDE = []  # (index, template, pos, neg)
for i, s in enumerate(WORK_GOALS + PRIVATE_LIFE, start=1):
    HOFSTEDE.append((i, f"{s} is [MASK].", "unimportant", "important"))
HOFSTEDE += [
    (15, "I [MASK] feel nervous or tense.", "never", "always"),
    (16, "I am [MASK] a happy person.", "never", "always"),
    (17, "Other people or circumstances [MASK] prevent me from doing what I really want to.",
     "never", "always"),
    (18, "My state of health these days is [MASK].", "poor", "good"),
    (19, "I am [MASK] to be a citizen of my country.", "ashamed", "proud"),
    (20, "Subordinates are [MASK] afraid to contradict their boss.", "always", "never"),
    (21, "I [MASK] that one can be a good manager without having a precise answer to every "
         "question.", "disagree", "agree"),
    (22, "I [MASK] that persistent efforts are the surest way to results.", "disagree", "agree"),
    (23, "I [MASK] that an organization structure in which certain subordinates have two bosses "
         "should be avoided at all costs.", "disagree", "agree"),
    (24, "I [MASK] that organization rules should not be broken, not even when breaking them "
         "would be in the organization's best interest.", "disagree", "agree"),
]

# Real German renderings of the positive-label sentence, keyed by item index.
GERMAN_HOFSTEDE = {
    1: "Ausreichend Zeit für das Privat- oder Familienleben zu haben ist unwichtig.",
    2: "Einen Vorgesetzten zu haben, den man respektieren kann, ist unwichtig.",
    3: "Anerkennung für gute Leistungen zu bekommen ist unwichtig.",
    4: "Einen sicheren Arbeitsplatz zu haben ist unwichtig.",
    5: "Angenehme Kollegen zu haben ist unwichtig.",
    6: "Interessante Arbeit zu machen ist unwichtig.",
    7: "Vom Vorgesetzten bei Entscheidungen über die eigene Arbeit konsultiert zu werden ist "
       "unwichtig.",
    8: "In einer attraktiven Gegend zu wohnen ist unwichtig.",
    9: "Eine Arbeit zu haben, die von Familie und Freunden respektiert wird, ist unwichtig.",
    10: "Aufstiegsmöglichkeiten zu haben ist unwichtig.",
    11: "Zeit für Vergnügen freizuhalten ist unwichtig.",
    12: "Mäßigung, also wenige Wünsche zu haben, ist unwichtig.",
    13: "Einem Freund einen Gefallen zu tun ist unwichtig.",
    14: "Sparsamkeit, also nicht mehr als nötig auszugeben, ist unwichtig.",
    15: "Ich fühle mich nie nervös oder angespannt.",
    16: "Ich bin nie ein glücklicher Mensch.",
    17: "Andere Menschen oder Umstände hindern mich nie daran, zu tun, was ich wirklich möchte.",
    18: "Mein Gesundheitszustand ist derzeit schlecht.",
    19: "Ich schäme mich, Bürger meines Landes zu sein.",
    20: "Untergebene haben immer Angst, ihrem Vorgesetzten zu widersprechen.",
    21: "Ich bezweifle, dass man ein guter Manager sein kann, ohne auf jede Frage eine genaue "
        "Antwort zu haben.",
    22: "Ich bezweifle, dass beharrliche Anstrengungen der sicherste Weg zum Erfolg sind.",
    23: "Ich bezweifle, dass eine Organisationsstruktur, in der bestimmte Untergebene zwei "
        "Vorgesetzte haben, um jeden Preis vermieden werden sollte.",
    24: "Ich lehne die Ansicht ab, dass die Regeln einer Organisation nicht gebrochen werden "
        "sollten, auch wenn ein Bruch im Interesse der Organisation wäre.",
}
# (english token, german token) links for the items string matching cannot resolve.
GERMAN_ALIGNMENTS = {19: [(2, 1, 0.93), (0, 0, 0.97)], 21: [(1, 1, 0.88), (0, 0, 0.98)],
                     22: [(1, 1, 0.9), (0, 0, 0.98)], 23: [(1, 1, 0.87), (0, 0, 0.97)]}
GERMAN_OVERRIDES = {
    24: ("Ich [MASK] die Ansicht ab, dass die Regeln einer Organisation nicht gebrochen werden "
         "sollten, auch wenn ein Bruch im Interesse der Organisation wäre.", "lehne", "teile"),
}
GERMAN_LABELS = {
    "unimportant": "unwichtig", "important": "wichtig", "never": "nie", "always": "immer",
    "poor": "schlecht", "good": "gut", "ashamed": "beschämt", "proud": "stolz",
    "disagree": "widersprechen", "agree": "zustimmen",
}

# --------------------------------------------------------------------- WVS


def items(category, template, pos, neg, lo, hi, fills=None):
    if fills is None:
        return [(category, template, pos, neg, lo, hi)]
    return [(category, template.format(x=f, X=f[0].upper() + f[1:]), pos, neg, lo, hi)
            for f in fills]


SOC = "Social Values, Attitudes and Stereotypes"
HAP = "Happiness and Well-being"
CAP = "Social Capital, Trust and Organisational Membership"
ECO = "Economic Values"
COR = "Corruption"
MIG = "Migration"
SEC = "Security"
PMI = "Postmaterialist Index"
SCI = "Science and Technology"
REL = "Religious Values"
ETH = "Ethical Values and Norms"
POL = "Political Interest and Political Participation"
CUL = "Political Culture and Political Regimes"

WVS = []
WVS += items(SOC, "In my life, {x} is [MASK].", "unimportant", "important", 1, 4,
             ["family", "friendship", "leisure time", "politics", "work", "religion"])
WVS += items(SOC, "Teaching children {x} at home is [MASK].", "unnecessary", "necessary", 1, 2,
             ["good manners", "independence", "hard work", "a feeling of responsibility",
              "imagination", "tolerance and respect for other people", "thrift",
              "determination and perseverance", "religious faith", "unselfishness",
              "obedience"])
WVS += items(SOC, "Having {x} as neighbours is [MASK].", "acceptable", "unacceptable", 1, 2,
             ["drug addicts", "people of a different race", "people who have AIDS",
              "immigrant workers", "homosexuals", "people of a different religion",
              "heavy drinkers", "unmarried couples living together",
              "people who speak a different language"])
WVS += items(SOC, "I [MASK] that {x}.", "disagree", "agree", 1, 4,
             ["one of my main goals in life has been to make my parents proud",
              "when a mother works for pay the children suffer",
              "on the whole men make better political leaders than women do",
              "a university education is more important for a boy than for a girl",
              "on the whole men make better business executives than women do",
              "being a housewife is just as fulfilling as working for pay",
              "when jobs are scarce men should have more right to a job than women",
              "when jobs are scarce employers should give priority to people of this country",
              "a woman earning more money than her husband is certain to cause problems",
              "homosexual couples are as good parents as other couples",
              "it is a duty towards society to have children",
              "adult children have the duty to provide long-term care for their parents",
              "people who do not work turn lazy",
              "work is a duty towards society",
              "work should always come first even if it means less spare time"])
WVS += items(SOC, "{X} in the future would be a [MASK] thing.", "bad", "good", 1, 3,
             ["less importance placed on work", "more emphasis on the development of technology",
              "greater respect for authority", "more emphasis on family life"])

WVS += items(HAP, "Taking all things together, I am [MASK].", "unhappy", "happy", 1, 4)
WVS += items(HAP, "All things considered, my state of health is [MASK].", "poor", "good", 1, 5)
WVS += items(HAP, "In the last year my family has [MASK] gone without {x}.", "never", "often", 1, 4,
             ["enough food to eat", "medicine or medical treatment", "a cash income",
              "a safe shelter over our heads", "feeling safe from crime at home"])
WVS += items(HAP, "I feel that I have [MASK] control over the way my life turns out.",
             "complete", "no", 1, 10)
WVS += items(HAP, "All things considered, I am [MASK] with my life as a whole these days.",
             "satisfied", "dissatisfied", 1, 10)
WVS += items(HAP, "Compared to my parents, my standard of living is [MASK].", "worse", "better",
             1, 3)
WVS += items(HAP, "I am [MASK] with the financial situation of my household.", "satisfied",
             "dissatisfied", 1, 10)

WVS += items(CAP, "Most people can be [MASK].", "distrusted", "trusted", 1, 2)
WVS += items(CAP, "I [MASK] trust {x}.", "never", "completely", 1, 4,
             ["my family", "my neighbourhood", "people I know personally",
              "people I meet for the first time", "people of another religion",
              "people of another nationality"])
WVS += items(CAP, "I have [MASK] confidence in {x}.", "no", "great", 1, 4,
             ["the churches", "the armed forces", "the press", "television", "labour unions",
              "the police", "the courts", "the government", "political parties", "parliament",
              "the civil service", "universities", "elections", "major companies", "banks",
              "environmental organizations", "women's organizations", "charitable organizations",
              "the United Nations", "the International Monetary Fund",
              "the International Criminal Court", "the World Bank",
              "the World Health Organization", "the World Trade Organization"])
WVS += items(CAP, "I am an [MASK] member of {x}.", "active", "inactive", 0, 2,
             ["a religious organization", "a sport or recreational organization",
              "an art, music or educational organization", "a labour union", "a political party",
              "an environmental organization", "a professional association",
              "a charitable organization", "a consumer organization"])

WVS += items(ECO, "Incomes should be made more [MASK].", "unequal", "equal", 1, 10)
WVS += items(ECO, "Private ownership of business should be [MASK].", "reduced", "increased", 1, 10)
WVS += items(ECO, "The government should take [MASK] responsibility to ensure that everyone is "
                  "provided for.", "more", "less", 1, 10)
WVS += items(ECO, "Competition is [MASK].", "harmful", "beneficial", 1, 10)
WVS += items(ECO, "In the long run, hard work [MASK] brings a better life.", "rarely", "usually",
             1, 10)
WVS += items(ECO, "Protecting the environment should be given [MASK] priority than economic "
                  "growth.", "lower", "higher", 1, 2)

WVS += items(COR, "Corruption in my country is [MASK].", "widespread", "absent", 1, 10)
WVS += items(COR, "I think that [MASK] {x} are involved in corruption.", "all", "none", 1, 4,
             ["state authorities", "business executives", "local authorities",
              "civil service providers", "journalists"])
WVS += items(COR, "Ordinary people [MASK] have to pay a bribe to get services.", "always", "never",
             1, 4)
WVS += items(COR, "The risk of being punished for giving or receiving a bribe is [MASK].", "low",
             "high", 1, 10)
WVS += items(COR, "Corruption in my country has [MASK] in recent years.", "increased",
             "decreased", 1, 3)

WVS += items(MIG, "For the development of my country, the impact of immigrants is [MASK].",
             "positive", "negative", 1, 5)
WVS += items(MIG, "I [MASK] that immigration {x}.", "disagree", "agree", 1, 3,
             ["fills important job vacancies", "strengthens cultural diversity",
              "increases the crime rate",
              "gives asylum to political refugees who are persecuted elsewhere",
              "increases the risks of terrorism", "helps poor people establish new lives",
              "increases unemployment", "leads to social conflict"])
WVS += items(MIG, "The government should let immigrants come [MASK].", "never", "freely", 1, 4)

WVS += items(SEC, "I feel [MASK] in my neighbourhood these days.", "unsafe", "safe", 1, 4)
WVS += items(SEC, "In my neighbourhood, {x} happens [MASK].", "rarely", "frequently", 1, 4,
             ["robbery", "alcohol consumption in the streets",
              "police interference with private life", "racist behaviour",
              "drug sale in the streets", "street violence", "sexual harassment"])
WVS += items(SEC, "For security reasons, I have [MASK] {x}.", "never", "often", 1, 2,
             ["avoided carrying much money", "stayed at home at night", "carried a weapon"])
WVS += items(SEC, "I am [MASK] worried about {x}.", "not", "very", 1, 4,
             ["losing my job", "not being able to give my children a good education",
              "a war involving my country", "a terrorist attack", "a civil war"])
WVS += items(SEC, "I would [MASK] fight for my country in case of war.", "refuse", "willingly",
             1, 2)
WVS += items(SEC, "Between freedom and equality, freedom is [MASK].", "secondary", "primary", 1, 2)
WVS += items(SEC, "Between freedom and security, freedom is [MASK].", "secondary", "primary", 1, 2)
WVS += items(SEC, "I have [MASK] been a victim of a crime during the past year.", "never",
             "recently", 1, 2)
WVS += items(SEC, "Someone in my family has [MASK] been a victim of a crime during the past "
                  "year.", "never", "recently", 1, 2)

# Economic Values above and the index below are kept in the corpus but never
# scored.
WVS += items(PMI, "A national aim of {x} is [MASK].", "secondary", "primary", 1, 4,
             ["a high level of economic growth", "strong defence forces",
              "giving people more say about how things are done",
              "making our cities and countryside more beautiful",
              "maintaining order in the nation", "fighting rising prices"])

WVS += items(SCI, "I [MASK] that {x}.", "agree", "disagree", 1, 10,
             ["science and technology are making our lives healthier, easier and more "
              "comfortable",
              "science and technology will bring more opportunities to the next generation",
              "we depend too much on science and not enough on faith",
              "science breaks down people's ideas of right and wrong",
              "it is not important for me to know about science in my daily life",
              "the world is better off because of science and technology"])

WVS += items(REL, "God is [MASK] in my life.", "important", "unimportant", 1, 10)
WVS += items(REL, "I [MASK] in {x}.", "doubt", "believe", 1, 2,
             ["God", "life after death", "hell", "heaven"])
WVS += items(REL, "I [MASK] that {x}.", "disagree", "agree", 1, 4,
             ["whenever science and religion conflict religion is always right",
              "the only acceptable religion is my religion",
              "religion is about following norms rather than doing good to other people",
              "science and religion can go together"])
WVS += items(REL, "I [MASK] attend religious services.", "never", "weekly", 1, 7)
WVS += items(REL, "I [MASK] pray.", "never", "daily", 1, 8)
WVS += items(REL, "I am a [MASK] person.", "irreligious", "religious", 1, 3)

WVS += items(ETH, "{X} is [MASK].", "justifiable", "unjustifiable", 1, 10,
             ["claiming government benefits to which you are not entitled",
              "avoiding a fare on public transport", "stealing property", "cheating on taxes",
              "accepting a bribe", "homosexuality", "prostitution", "abortion", "divorce",
              "sex before marriage", "suicide", "euthanasia", "a man beating his wife",
              "parents beating children", "violence against other people",
              "terrorism as a political weapon", "having casual sex", "political violence",
              "the death penalty"])
WVS += items(ETH, "The government should [MASK] have the right to {x}.", "never", "definitely",
             1, 4,
             ["keep people under video surveillance in public areas",
              "monitor all emails exchanged on the internet",
              "collect information about anyone living in the country"])
WVS += items(ETH, "I [MASK] that nowadays one often has trouble deciding which moral rules are "
                  "right.", "disagree", "agree", 1, 10)

WVS += items(POL, "I am [MASK] interested in politics.", "not", "very", 1, 4)
WVS += items(POL, "I [MASK] use {x} to learn what is going on in the world.", "never", "daily",
             1, 5,
             ["daily newspapers", "printed magazines", "TV news", "radio news", "a mobile phone",
              "email", "the internet", "social media", "talks with friends or colleagues"])
WVS += items(POL, "I have [MASK] {x}.", "never", "often", 1, 3,
             ["signed a petition", "joined in boycotts", "attended peaceful demonstrations",
              "joined strikes", "donated to a political campaign",
              "contacted a government official",
              "encouraged others to take action about political issues",
              "encouraged others to vote", "searched for information about politics online"])
WVS += items(POL, "I [MASK] vote in {x}.", "never", "always", 1, 3,
             ["local elections", "national elections"])
WVS += items(POL, "Discussing political matters with friends is something I do [MASK].", "never",
             "frequently", 1, 3)
WVS += items(POL, "I have [MASK] organized political events online.", "never", "often", 1, 3)
WVS += items(POL, "Political news reaches me [MASK].", "rarely", "daily", 1, 5)

WVS += items(CUL, "{X} is a [MASK] way of governing this country.", "bad", "good", 1, 4,
             ["having a strong leader who does not have to bother with parliament",
              "having experts make decisions", "having the army rule",
              "having a democratic political system"])
WVS += items(CUL, "In a democracy, it is [MASK] that {x}.", "essential", "irrelevant", 1, 10,
             ["governments tax the rich and subsidize the poor",
              "religious authorities interpret the laws",
              "people choose their leaders in free elections",
              "people receive state aid for unemployment",
              "the army takes over when government is incompetent",
              "civil rights protect people from state oppression",
              "the state makes incomes equal", "people obey their rulers",
              "women have the same rights as men"])
WVS += items(CUL, "Living in a country that is governed democratically is [MASK] for me.",
             "important", "unimportant", 1, 10)
WVS += items(CUL, "My country is [MASK] democratic.", "fully", "not", 1, 10)
WVS += items(CUL, "I am [MASK] with how the political system is functioning in my country.",
             "satisfied", "dissatisfied", 1, 10)
WVS += items(CUL, "Respect for individual human rights in my country is [MASK].", "absent",
             "strong", 1, 4)
WVS += items(CUL, "In political matters, my views are on the [MASK].", "right", "left", 1, 10)
WVS += items(CUL, "In elections here, it happens [MASK] that {x}.", "rarely", "often", 1, 4,
             ["votes are counted fairly", "opposition candidates are prevented from running",
              "TV news favours the governing party", "voters are bribed",
              "journalists provide fair coverage of elections", "election officials are fair",
              "rich people buy elections"])

EXPECTED_COUNTS = {SOC: 45, HAP: 11, CAP: 40, ECO: 6, COR: 9, MIG: 10, SEC: 21, PMI: 6, SCI: 6,
                   REL: 12, ETH: 23, POL: 24, CUL: 25}
EXCLUDED = {ECO, PMI}

# ------------------------------------------------------ pseudo translation

SYLLABLES = {
    "ro": ["ba", "cu", "dă", "fe", "gi", "la", "mo", "nu", "pe", "ră", "si", "ță", "va"],
    "el": ["κα", "λο", "μη", "νε", "πα", "ρι", "στο", "τε", "φα", "χο", "ψυ", "ωρ"],
    "ur": ["با", "تر", "جا", "دل", "کا", "لم", "مر", "نی", "پا", "سے", "گو"],
    "fa": ["بو", "تا", "خو", "دا", "را", "زی", "سا", "شو", "کو", "می", "نا"],
    "tl": ["ba", "ka", "la", "ma", "na", "pa", "sa", "ta", "wa", "ya", "ng"],
    "id": ["ba", "da", "ja", "ke", "la", "me", "nya", "pe", "ra", "si", "tu"],
    "de": ["ber", "dan", "ein", "gen", "hal", "kom", "lich", "mach", "sch", "ung", "ver"],
    "ms": ["ba", "ci", "da", "ga", "ha", "ke", "la", "mu", "pa", "ru", "se"],
    "bn": ["কা", "খা", "গা", "তা", "দা", "না", "পা", "বা", "মা", "রা", "সা"],
    "sr": ["ба", "ве", "да", "жи", "зо", "ка", "ли", "мо", "но", "пр", "ст"],
    "tr": ["ba", "çe", "da", "ğı", "ka", "le", "mı", "ne", "öz", "şi", "ük"],
    "vi": ["bà", "cô", "đi", "gì", "hạ", "khô", "lá", "mỗ", "nư", "phả", "thư"],
    "ko": ["가", "나", "다", "라", "마", "바", "사", "아", "자", "차", "하"],
}
# Languages whose pseudo grammar moves the sentence's first word behind its second.
VERB_FINAL = {"ur", "fa", "bn", "tr", "ko"}


def digest(*parts):
    h = hashlib.sha256("\x1f".join(parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


class Lexicon:
    """Stable English word -> pseudo word map for one language."""

    def __init__(self, lang):
        self.lang = lang
        self.words = {}
        self.used = set()

    def word(self, english, salt=""):
        key = (english.lower(), salt)
        if key in self.words:
            return self.words[key]
        syl = SYLLABLES[self.lang]
        attempt = 0
        while True:
            n = digest(self.lang, english.lower(), salt, str(attempt))
            count = 2 + n % 3
            w = "".join(syl[(n >> (8 * k)) % len(syl)] for k in range(count))
            if w not in self.used:
                break
            attempt += 1
        self.used.add(w)
        self.words[key] = w
        return w


def split_punct(token):
    core_end = len(token)
    while core_end > 0 and unicodedata.category(token[core_end - 1]).startswith("P"):
        core_end -= 1
    return token[:core_end], token[core_end:]


def capitalize(s):
    return s[:1].upper() + s[1:]


def pseudo_translate(sentence, lex, label_index, label_word):
    """Word-by-word pseudo translation. Returns (text, target index of label)."""
    out = []
    for i, tok in enumerate(sentence.split(" ")):
        core, punct = split_punct(tok)
        w = label_word if i == label_index else lex.word(core)
        out.append(w + punct)
    order = list(range(len(out)))
    if lex.lang in VERB_FINAL and len(out) > 2:
        # Swap the first two words; punctuation stays on the second slot.
        c0, p0 = split_punct(out[0])
        c1, p1 = split_punct(out[1])
        out[0], out[1] = c1 + p0, c0 + p1
        order[0], order[1] = 1, 0
    out[0] = capitalize(out[0])
    return " ".join(out), order.index(label_index)


# ------------------------------------------------------------------- output


def write_jsonl(path, header, records):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header is not None:
            f.write(json.dumps(header, ensure_ascii=False) + "\n")
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def build_probes():
    probes = []
    for idx, template, pos, neg in HOFSTEDE:
        probes.append({"id": f"hof:{idx:02d}", "survey": "hofstede",
                       "group": DIMENSION_OF_INDEX[idx], "hofstede_index": idx,
                       "template": template, "label_pos": pos, "label_neg": neg,
                       "scale_min": 1, "scale_max": 5})
    counts = {}
    for n, (cat, template, pos, neg, lo, hi) in enumerate(WVS, start=1):
        counts[cat] = counts.get(cat, 0) + 1
        assert template.count("[MASK]") == 1, template
        probes.append({"id": f"wvs:{n:03d}", "survey": "wvs", "group": cat,
                       "template": template, "label_pos": pos, "label_neg": neg,
                       "scale_min": lo, "scale_max": hi})
    assert counts == EXPECTED_COUNTS, counts
    assert len(WVS) == 238
    return probes


def mask_index(template):
    return template.split(" ").index(next(t for t in template.split(" ") if "[MASK]" in t))


def render(template, label):
    return template.replace("[MASK]", label)


def build_fixtures(probes):
    translations = []  # (text, target_lang, translated)
    alignments = []
    overrides = []
    done_labels = set()

    def add_label(lang, english, local):
        if (lang, english) in done_labels:
            return
        done_labels.add((lang, english))
        translations.append((english, lang, local))

    scoring = [p for p in probes if p["group"] not in EXCLUDED]
    for li, (lang, _, _) in enumerate(CULTURE):
        lex = Lexicon(lang)
        for k, p in enumerate(scoring):
            english = render(p["template"], p["label_pos"])
            li_mask = mask_index(p["template"])
            if lang == "de" and p["survey"] == "hofstede":
                idx = p["hofstede_index"]
                translations.append((english, lang, GERMAN_HOFSTEDE[idx]))
                add_label(lang, p["label_pos"], GERMAN_LABELS[p["label_pos"]])
                add_label(lang, p["label_neg"], GERMAN_LABELS[p["label_neg"]])
                if idx in GERMAN_ALIGNMENTS:
                    alignments.append({"source_sentence": english,
                                       "target_sentence": GERMAN_HOFSTEDE[idx],
                                       "links": [list(l) for l in GERMAN_ALIGNMENTS[idx]]})
                if idx in GERMAN_OVERRIDES:
                    masked, lp, ln = GERMAN_OVERRIDES[idx]
                    overrides.append({"probe_id": p["id"], "language_code": lang,
                                      "masked_text": masked, "label_pos_local": lp,
                                      "label_neg_local": ln})
                continue

            def label_local(word):
                if lang == "de" and word in GERMAN_LABELS:
                    return GERMAN_LABELS[word]
                if lang == "tl" and word in ("distrusted", "trusted"):
                    return lex.word("trust")  # both labels collapse onto one word
                if lang == "vi" and word == "irreligious":
                    return lex.word("no") + " " + lex.word("religion")
                return lex.word(word)

            pos_local = label_local(p["label_pos"])
            neg_local = label_local(p["label_neg"])
            add_label(lang, p["label_pos"], pos_local)
            add_label(lang, p["label_neg"], neg_local)

            # Planted divergences: a synonym the aligner resolves, or one only
            # a manual override can fix.
            synonym = (k * 7 + li * 3) % 29 == 0
            manual = not synonym and (k * 5 + li) % 101 == 3
            surface = pos_local
            if (synonym or manual) and " " not in pos_local:
                surface = lex.word(p["label_pos"], salt="synonym")
            text, target_index = pseudo_translate(english, lex, li_mask, surface)
            translations.append((english, lang, text))
            if surface != pos_local and synonym:
                links = [[li_mask, target_index, 0.91]]
                other = (target_index + 1) % len(text.split(" "))
                links.append([li_mask, other, 0.34])
                alignments.append({"source_sentence": english, "target_sentence": text,
                                   "links": links})
            elif surface != pos_local and manual:
                toks = text.split(" ")
                core, punct = split_punct(toks[target_index])
                toks[target_index] = "[MASK]" + punct
                overrides.append({"probe_id": p["id"], "language_code": lang,
                                  "masked_text": " ".join(toks),
                                  "label_pos_local": core, "label_neg_local": neg_local})

    translations.sort()
    tr_records = [{"text": t, "source_lang": "en", "target_lang": lang, "translated_text": x}
                  for t, lang, x in translations]
    alignments.sort(key=lambda a: (a["source_sentence"], a["target_sentence"]))
    overrides.sort(key=lambda o: (o["probe_id"], o["language_code"]))
    return tr_records, alignments, overrides


def build_wvs_reference(probes):
    rows = []
    for lang, country, _ in sorted(CULTURE, key=lambda c: c[1]):
        for p in probes:
            if p["survey"] != "wvs":
                continue
            lo, hi = p["scale_min"], p["scale_max"]
            u = digest("wvs-reference", country, p["id"]) / 2.0**64
            mean = round(lo + (hi - lo) * (0.15 + 0.7 * u), 3)
            rows.append({"country": country, "question_id": p["id"], "mean_response": mean,
                         "scale_min": lo, "scale_max": hi})
    return rows


def main():
    probes = build_probes()
    write_jsonl(os.path.join(DATA, "corpus", "probes.jsonl"),
                {"schema": "valueprobe.corpus", "version": 1}, probes)
    write_jsonl(os.path.join(DATA, "corpus", "culture_map.jsonl"),
                {"schema": "valueprobe.culture_map", "version": 1},
                [{"language": l, "country": c, "wikipedia_articles": a} for l, c, a in CULTURE])
    write_jsonl(os.path.join(DATA, "reference", "hofstede_published.jsonl"),
                {"schema": "valueprobe.reference.hofstede", "version": 1,
                 "source": "Published country scores (Hofstede Insights country comparison)"},
                [dict(country=c, **dict(zip(("pdi", "idv", "mas", "uai", "lto", "ivr"), v)))
                 for c, v in sorted(HOFSTEDE_PUBLISHED.items())])
    write_jsonl(os.path.join(DATA, "reference", "wvs_wave7_synthetic.jsonl"),
                {"schema": "valueprobe.reference.wvs", "version": 1,
                 "source": "SYNTHETIC country means shaped like WVS wave 7; not survey data",
                 "notes": "Replace with means computed from the WVS wave 7 release for real "
                          "analyses."},
                build_wvs_reference(probes))
    tr, al, ov = build_fixtures(probes)
    write_jsonl(os.path.join(DATA, "fixtures", "translations.jsonl"), None, tr)
    write_jsonl(os.path.join(DATA, "fixtures", "alignments.jsonl"), None, al)
    write_jsonl(os.path.join(DATA, "fixtures", "overrides.jsonl"), None, ov)
    print(f"{len(probes)} probes, {len(tr)} translations, {len(al)} alignments, "
          f"{len(ov)} overrides", file=sys.stderr)


if __name__ == "__main__":
    main()
