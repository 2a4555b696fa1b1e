"""
Script to write the p=1 synthetic corpus (graph, truth, metadata) to disk
"""
import argparse
import sys
from pathlib import Path
from dotenv import load_dotenv

# Add parent directory to path so we can import src
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import get_settings
from src.generators import generate
from src.loaders import save_graph, save_partition
from src.models import Family, GeneratorSpec

# Load environment variables
load_dotenv()


def corpus_specs(seed: int, max_nodes: int):
    """Every p=1 instance of the default grids with at most max_nodes nodes"""
    settings = get_settings()
    specs = [GeneratorSpec(family=Family.ER_SINGLE, sizes=[m], seed=seed) for m in range(3, 9)]
    pairs = settings.verify_pair_sizes
    for i, m in enumerate(pairs):
        for n in pairs[i:]:
            if m + n <= max_nodes:
                specs.append(GeneratorSpec(family=Family.TWO_COMMUNITIES_BRIDGED, sizes=[m, n], seed=seed))
                specs.append(GeneratorSpec(family=Family.TWO_CLIQUES_W_BRIDGE, sizes=[m, n], bridge_count=1, seed=seed))
    specs.append(GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 3, 3], seed=seed))
    specs.append(GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 3, 4], seed=seed))
    return [s for s in specs if sum(s.sizes) <= max_nodes]


def instance_name(spec: GeneratorSpec) -> str:
    name = f"{spec.family.value}_{'-'.join(str(m) for m in spec.sizes)}"
    if spec.family == Family.TWO_CLIQUES_W_BRIDGE:
        name += f"_w{spec.bridge_count}"
    return f"{name}_s{spec.seed}"


def main():
    settings = get_settings()
    parser = argparse.ArgumentParser(description="Write the synthetic p=1 corpus")
    parser.add_argument("--output-dir", default="./data/corpus", help="Corpus root directory")
    parser.add_argument("--seed", type=int, default=settings.seed, help="Defaults to MODDENS_SEED")
    parser.add_argument("--max-nodes", type=int, default=10, help="Largest instance to write")
    args = parser.parse_args()

    root = Path(args.output_dir)
    print("\n" + "="*60)
    print(f"📝 Writing corpus to {root}")
    print("="*60)

    specs = corpus_specs(args.seed, args.max_nodes)
    for spec in specs:
        labeled = generate(spec)
        target = root / instance_name(spec)
        target.mkdir(parents=True, exist_ok=True)
        save_graph(labeled.graph, target / "graph.txt")
        save_partition(labeled.truth, labeled.graph, target / "truth.txt")
        (target / "metadata.json").write_text(labeled.metadata().to_json() + "\n", encoding="utf-8")
        print(f"✅ {target.name}: {labeled.graph.node_count} nodes, {labeled.graph.edge_count} edges")

    print("\n" + "="*60)
    print(f"🎉 Wrote {len(specs)} instances")
    print("="*60)


if __name__ == "__main__":
    main()
