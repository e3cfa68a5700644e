#!/usr/bin/env python3
"""Writes data/toy_vectors.txt: a small word-vector table in GloVe text format.

Words are grouped into themes; each word is its theme's centre plus noise, so
documents built from same-theme words land close together. The table only
exists so the topic pipeline can run offline; it carries no linguistic
meaning beyond the grouping below.
"""
import random
import sys

DIM = 24
SPREAD = 0.35

THEMES = {
    "warmth": "friendly welcoming outgoing hospitable polite kind warm generous caring nice "
              "helpful peaceful gentle sweet respect welcome",
    "competence": "hardworking industrious intelligent resilient creative ambitious innovative "
                  "punctual efficient smart talented skilled educated disciplined successful "
                  "engineering math technology chess entrepreneurial excel strong brave confident",
    "culture": "culture tradition music festival art history heritage diverse unique dance samba "
               "anime fashion fashionable holiday celebrate dynamic community identity label "
               "siesta multicultural",
    "food": "pasta food tea coffee rice beer wine spicy barbecue cheese sushi taco pizza meat "
            "whiskey vodka maple syrup cook cooking eat drink pork alcohol fast vegetarian good",
    "leisure": "sport soccer football hockey cricket baseball outdoor beach surf surfing travel bicycle car "
               "video game shopping play rugby basketball hiking ocean mountain nature land enjoy",
    "faith": "god prayer faith scripture meditation spiritual devout religious church fasting peace "
             "charity religion sunday pray worship karma reincarnation heaven sin jesus mosque "
             "turban nonviolence balance shrine fire purity unity believe practice",
    "toxic": "lazy criminal violent dirty greedy rude stupid drunk arrogant dishonest thief "
             "ignorant untrustworthy terrorist extremist fanatic brainwashed hypocrite dangerous "
             "thug weak crazy hysterical useless inferior dramatic steal lie anger control",
    "friction": "hate rule change outsider cold immigrant authority tax traffic loud stingy quiet "
                "strict conservative aggressive emotional sensitive confused dislike avoid struggle "
                "judge stereotype violence materialism intolerance privilege people",
    "language": "speak english spanish language loudly mind direct express ask direction",
    "values": "love value work money education freedom gun queue queuing tall proud wealthy "
              "laidback justin bieber romance emotion multitask trust trusted relax joke handle "
              "sing drive stop time hard family friend equality many know much take always valid cut hair",
}


def main(path):
    rng = random.Random(20230601)
    rows = []
    seen = set()
    for theme in sorted(THEMES):
        centre = [rng.gauss(0.0, 1.0) for _ in range(DIM)]
        for word in THEMES[theme].split():
            if word in seen:
                continue
            seen.add(word)
            vec = [c + rng.gauss(0.0, SPREAD) for c in centre]
            rows.append(word + " " + " ".join(f"{v:.5f}" for v in vec))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/toy_vectors.txt")
