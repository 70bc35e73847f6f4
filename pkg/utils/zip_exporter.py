"""
Utility for bundling a run's results, sidecars and configuration into a ZIP file.
"""
import io
import os
import zipfile
from typing import Dict, Optional

from utils.errors import OutputError


class ZipExporter:
    """Exporter for result bundles."""

    def create_zip(self, files_to_zip: Dict[str, str], output_file: str,
                   readme_content: Optional[str] = None) -> str:
        """
        Create a ZIP file from local files.

        Args:
            files_to_zip: Mapping of archive names to local file paths; missing files are skipped
            output_file: Path to the output ZIP file
            readme_content: Text stored as README.txt (optional)

        Returns:
            Path to the generated ZIP file
        """
        try:
            directory = os.path.dirname(output_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with zipfile.ZipFile(output_file, "w", compression=zipfile.ZIP_DEFLATED) as zipf:
                for zip_path, local_path in files_to_zip.items():
                    if os.path.exists(local_path):
                        zipf.write(local_path, zip_path)
                if readme_content:
                    zipf.writestr("README.txt", readme_content)
            return output_file
        except (OSError, zipfile.BadZipFile) as e:
            raise OutputError(f"Error creating ZIP file: {str(e)}", path=output_file) from e

    def bundle_bytes(self, contents: Dict[str, str], readme_content: Optional[str] = None) -> bytes:
        """
        Build a ZIP archive in memory from text contents, for download buttons.

        Args:
            contents: Mapping of archive names to file text
            readme_content: Text stored as README.txt (optional)

        Returns:
            ZIP archive bytes
        """
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_DEFLATED) as zipf:
            for name, text in contents.items():
                zipf.writestr(name, text)
            if readme_content:
                zipf.writestr("README.txt", readme_content)
        return buffer.getvalue()


def bundle_readme(config_text: str, record_count: int) -> str:
    return (
        "SPROCKET results bundle\n"
        "=======================\n\n"
        f"Result records: {record_count}\n\n"
        "results.csv / results.json  one row per (dataset, algorithm, seed)\n"
        "results.config.toml         fully resolved run configuration\n"
        "results.correctness.csv     per-instance 0/1 correctness (when emitted)\n\n"
        "Configuration\n"
        "-------------\n"
        f"{config_text}"
    )
