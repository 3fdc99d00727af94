"""
Utilitaires pour l'export des résultats (JSON, CSV, PDF).
"""
import datetime
import json
import math
import os
from io import BytesIO

import numpy as np
import pandas as pd

from config import JSON_SIGNIFICANT_DIGITS

_INDENT = "  "


def _to_builtin(value):
    """Convertit les types numpy et les objets exportables en types JSON natifs."""
    if hasattr(value, "to_dict") and not isinstance(value, (dict, pd.DataFrame)):
        return _to_builtin(value.to_dict())
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_builtin(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def _format_float(value):
    if not math.isfinite(value):
        return "null"
    text = f"{value:.{JSON_SIGNIFICANT_DIGITS}g}"
    if not any(c in text for c in ".e"):
        text += ".0"
    return text


def _encode(value, depth):
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    pad = _INDENT * (depth + 1)
    end = _INDENT * depth
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(value[k], depth + 1)}"
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, depth + 1) for v in value) + "\n" + end + "]"
    raise TypeError(f"valeur non sérialisable : {type(value).__name__}")


def export_to_json(data):
    """
    Exporte des résultats au format JSON.

    Les flottants sont écrits avec 17 chiffres significatifs, NaN et ±inf
    deviennent null, les clés sont triées : une même entrée produit les mêmes
    octets.

    Args:
        data: dictionnaire (ou objet exposant to_dict)

    Returns:
        Données JSON encodées en UTF-8
    """
    return (_encode(_to_builtin(data), 0) + "\n").encode("utf-8")


def write_json(path, data):
    """Écrit export_to_json(data) dans path ; renvoie le chemin."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(export_to_json(data))
    return path


def export_to_csv(rows, columns=None):
    """
    Exporte une liste de lignes (dictionnaires) ou un DataFrame au format CSV.

    Args:
        rows: lignes ou DataFrame
        columns: ordre des colonnes (optionnel)

    Returns:
        Texte CSV (en-tête, virgule, point décimal, fins de ligne LF)
    """
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    index = isinstance(rows, pd.DataFrame) and not isinstance(rows.index, pd.RangeIndex)
    return frame.to_csv(index=index, float_format="%.17g", lineterminator="\n")


def write_csv(path, rows, columns=None):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(export_to_csv(rows, columns))
    return path


def _cell(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (dict, list)):
        text = json.dumps(_to_builtin(value), ensure_ascii=False)
        return text if len(text) <= 60 else text[:57] + "..."
    return str(value)


def generate_pdf_report(results, title="Rapport de vérification des solutions multi-bulles"):
    """
    Génère un rapport PDF récapitulant les fichiers de résultats.

    Args:
        results: dictionnaire {nom de fichier: contenu JSON décodé}
        title: titre du rapport

    Returns:
        Contenu du PDF sous forme de bytes
    """
    from reportlab.lib import colors
    from reportlab.lib.pagesizes import A4
    from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
    from reportlab.lib.units import cm
    from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

    buffer = BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=A4,
                            rightMargin=2 * cm, leftMargin=2 * cm,
                            topMargin=2 * cm, bottomMargin=2 * cm)
    story = []

    styles = getSampleStyleSheet()
    styles.add(ParagraphStyle(name='Center', parent=styles['Heading1'], alignment=1))
    styles.add(ParagraphStyle(name='Small', parent=styles['Normal'], fontSize=8))

    today = datetime.datetime.now().strftime("%d/%m/%Y")
    story.append(Paragraph(title, styles['Center']))
    story.append(Paragraph(f"Rapport généré le {today}", styles['Normal']))
    story.append(Spacer(1, 0.5 * cm))

    table_style = TableStyle([
        ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
        ('BACKGROUND', (0, 0), (0, -1), colors.lightgrey),
        ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
        ('PADDING', (0, 0), (-1, -1), 4),
        ('FONTSIZE', (0, 0), (-1, -1), 8),
    ])

    if not results:
        story.append(Paragraph("Aucun fichier de résultats trouvé.", styles['Normal']))

    for name in sorted(results):
        content = results[name]
        story.append(Paragraph(name, styles['Heading2']))
        if isinstance(content, dict) and isinstance(content.get("checks"), list):
            # résumé de la suite de vérification
            data = [["Contrôle", "Résultat", "Valeur", "Seuil"]]
            for check in content["checks"]:
                data.append([check.get("name", ""), "OK" if check.get("passed") else "ÉCHEC",
                             _cell(check.get("value")), _cell(check.get("threshold"))])
            table = Table(data, colWidths=[7 * cm, 2 * cm, 3.5 * cm, 3.5 * cm], repeatRows=1)
        elif isinstance(content, dict):
            data = [[key, _cell(content[key])] for key in sorted(content)]
            table = Table(data, colWidths=[5 * cm, 11 * cm])
        else:
            table = Table([["valeur", _cell(content)]], colWidths=[5 * cm, 11 * cm])
        table.setStyle(table_style)
        story.append(table)
        story.append(Spacer(1, 0.5 * cm))

    story.append(Spacer(1, 1 * cm))
    story.append(Paragraph("Les valeurs numériques sont des mesures sur une discrétisation ; "
                           "elles ne constituent pas une preuve d'existence.", styles['Small']))

    doc.build(story)
    pdf_content = buffer.getvalue()
    buffer.close()
    return pdf_content
