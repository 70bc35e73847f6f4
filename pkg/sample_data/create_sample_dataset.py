"""
Sample sine-burst datasets for trying the app and the CLI.
"""
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from utils.synthetic_data import make_train_test
from utils.ts_parser import write_ts


def create_sample_datasets(output_dir):
    """
    Write univariate and 3-channel sine-burst train/test splits as .ts files.

    Args:
        output_dir: Directory for the dataset folders

    Returns:
        Dictionary mapping dataset names to (train path, test path)
    """
    written = {}
    for name, channels in (("SineBursts", 1), ("SineBursts3D", 3)):
        train, test = make_train_test(n_train=20, n_test=50, length=128, channels=channels,
                                      seed=0, name=name)
        folder = os.path.join(output_dir, name)
        train_path = write_ts(train, os.path.join(folder, f"{name}_TRAIN.ts"))
        test_path = write_ts(test, os.path.join(folder, f"{name}_TEST.ts"))
        written[name] = (train_path, test_path)
        print(f"{name}: {train.n} train / {test.n} test series, {channels} channel(s)")
    return written


if __name__ == "__main__":
    output_dir = os.path.dirname(os.path.abspath(__file__))
    create_sample_datasets(output_dir)
    print(f"Sample datasets written under: {output_dir}")
    print(f"Run: python cli.py benchmark {os.path.join(output_dir, 'sample_manifest.toml')}")
