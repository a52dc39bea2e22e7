import json

import fire

from src.gadgets.triangle import build_triangle_witness_model
from src.queries import relational_structure_to_dict


def main(output_path: str):
    model = build_triangle_witness_model()
    with open(output_path, "w") as w:
        json.dump(relational_structure_to_dict(model), w, ensure_ascii=False, indent=2)


if __name__ == "__main__":
    fire.Fire(main)
