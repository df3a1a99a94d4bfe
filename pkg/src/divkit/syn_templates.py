"""Generation prompt catalog: four template families (topic, topic_styles,
topic_styles_persona, multi_topic_styles_persona) across four text styles.

Template strings are wire contracts, pinned by golden tests. Placeholders:
{topic}, {subtopic}, {keyword}, {persona}. The JSON output demonstration is
byte-identical across templates and is appended to every family member.
"""

from __future__ import annotations

STYLES = ("textbook_academic", "textbook_narrative", "blogpost", "wikihow")
FAMILIES = ("topic", "topic_styles", "topic_styles_persona", "multi_topic_styles_persona")

_OUTPUT_BLOCK = """## Output

- Your output must be in the following JSON format:

{{
    "passages": [
        {{

            "nuanced_content_to_be_learned": [keyword style list of new and intellectually complex concepts learned in this passage],

            "passage": "The passage text goes here."

        }},

        ....
    ],

    "multiple_choice_question": {{

        "question": "MC question utilizing the complex ideas learned in the passages.",

        "options": ["Option 1", "Option 2", "Option 3", "Option 4"] (do not use any indexing),

        "answer_label": "The correct answer label. Return the exact text from options"

        "step_by_step_answer_explanation": "a detailed step-by-step layout of how one arrives at this answer and what relevant information from the passages led to this answer."

    }}

}}
"""

_SEED_SECTIONS = """## Topic

{topic}

## Subtopic

{subtopic}

## Keyword

{keyword}

"""

_SEED_SECTIONS_PERSONA = """## Topic

{topic}

## Subtopic

{subtopic}

## Keyword

{keyword}

## Persona

{persona}

"""

_TOPIC = """# Task

Generate consecutive passages in textbook style, utilizing the following instructions.

## Instructions

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

""" + _SEED_SECTIONS + _OUTPUT_BLOCK

_TOPIC_TEXTBOOK_NARRATIVE = """# Task

Generate consecutive passages in an narrative textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Do not just list concepts, but develop each one in detail before moving to the next, as we prioritize depth of understanding and comprehensive exploration of the subject matter over breadth.

- Engagement: Use a narrative style akin to Michael Lewis, making it captivating and thought-provoking.

- Relevance: Connect the topic with current trends, real-life examples, or recent studies. Do not use images.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

Do not include a title or an introduction, simply write the content without headlines and introductory phrases. Do not use images.

""" + _SEED_SECTIONS + _OUTPUT_BLOCK

_TOPIC_TEXTBOOK_ACADEMIC = """# Task

Generate consecutive passages in an academic textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook targeted at college students.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Engagement: Write with an academic, professional and engaging tone that captivates interest.

- Application: Incorporate specific, practical examples, such as proofs in calculus or critical dates and figures in history.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

Do not include a title or an introduction, simply write the content without headlines and introductory phrases. Do not use images.

""" + _SEED_SECTIONS + _OUTPUT_BLOCK

_TOPIC_BLOGPOST = """# Task

Generate consecutive passages in a blog post style, utilizing the following instructions.

## Instructions

- Write an informative and insightful blog post that expands upon the topic {topic}.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Your post should delve into the nuances of the topic, offering fresh perspectives and deeper analysis.

- Inform: Provide valuable, well-researched information that educates the reader.

- Engage: Write in a conversational tone that connects with the audience, making complex ideas accessible.

- Illustrate: Use examples, anecdotes, or personal experiences to bring the topic to life.

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this blog post.

Do not give a title and do not start with sentences like "Have you ever..." or "Hello dear readers..", simply write the content without these introductory phrases.

""" + _SEED_SECTIONS + _OUTPUT_BLOCK

_TOPIC_WIKIHOW = """# Task

Generate consecutive passages in a Wikihow style, utilizing the following instructions.

## Instructions

- Write a long and very detailed tutorial that could be part of WikiHow.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Include in depth explanations for each step and how it helps achieve the desired outcome, inluding key tips and guidelines.

- Ensure clarity and practicality, allowing readers to easily follow and apply the instructions. Do not use images.,

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this WikiHow.

Do not include a title or an introduction, simply write the content without headlines and introductory phrases. Do not use images.

""" + _SEED_SECTIONS + _OUTPUT_BLOCK

_TSP_TEXTBOOK_NARRATIVE = """# Task

Generate consecutive passages in a narrative textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Do not just list concepts, but develop each one in detail before moving to the next, as we prioritize depth of understanding and comprehensive exploration of the subject matter over breadth.

- Engagement: Use a narrative style akin to Michael Lewis, making it captivating and thought-provoking.

- Relevance: Connect the topic with current trends, real-life examples, or recent studies. Do not use images.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_TSP_TEXTBOOK_ACADEMIC = """# Task

Generate consecutive passages in an academic textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Engagement: Write with an academic, professional and engaging tone that captivates interest.

- Application: Incorporate specific, practical examples, such as proofs in calculus or critical dates and figures in history.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

Do not include a title or an introduction, simply write the content without headlines and introductory phrases. Do not use images.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_TSP_BLOGPOST = """# Task

Generate consecutive passages in a blog post style, utilizing the following instructions.

## Instructions

- Write an informative and insightful blog post targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Your post should delve into the nuances of the topic, offering fresh perspectives and deeper analysis.

- Inform: Provide valuable, well-researched information that educates the reader.

- Engage: Write in a conversational tone that connects with the audience, making complex ideas accessible.

- Illustrate: Use examples, anecdotes, or personal experiences to bring the topic to life.

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this blog post.
Do not give a title and do not start with sentences like "Have you ever..." or "Hello dear readers..", simply write the content without these introductory phrases.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_TSP_WIKIHOW = """# Task

Generate consecutive passages in a Wikihow style, utilizing the following instructions.

## Instructions

- Write a long and very detailed tutorial that could be part of WikiHow targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- Assume the reader already has a basic knowledge of the high-level topic {topic}, but they are looking to learn more about subtopics including {subtopic}.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Include in depth explanations for each step and how it helps achieve the desired outcome, inluding key tips and guidelines.

- Ensure clarity and practicality, allowing readers to easily follow and apply the instructions. Do not use images.,

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this WikiHow.
Do not include a title or an introduction, simply write the content without headlines and introductory phrases.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_MTSP_TEXTBOOK_NARRATIVE = """# Task

Generate consecutive passages in a narrative textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- You will be given a list of topics and subtopics for each topic. You need combine the suitable topics and subtopics for the content generation. If there is no suitable combination, just use one topic and all of its subtopics.

- Assume the reader already has a basic knowledge of the high-level topic, but they are looking to learn more about subtopics.

- Do not just list concepts, but develop each one in detail before moving to the next, as we prioritize depth of understanding and comprehensive exploration of the subject matter over breadth.

- Engagement: Use a narrative style akin to Michael Lewis, making it captivating and thought-provoking.

- Relevance: Connect the topic with current trends, real-life examples, or recent studies. Do not use images.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_MTSP_TEXTBOOK_ACADEMIC = """# Task

Generate consecutive passages in an academic textbook style, utilizing the following instructions.

## Instructions

- Write an extensive and detailed course unit suitable for a textbook targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- You will be given a list of topics and subtopics for each topic. You need combine the suitable topics and subtopics for the content generation. If there is no suitable combination, just use one topic and all of its subtopics.

- Assume the reader already has a basic knowledge of the high-level topic, but they are looking to learn more about subtopics.

- Engagement: Write with an academic, professional and engaging tone that captivates interest.

- Application: Incorporate specific, practical examples, such as proofs in calculus or critical dates and figures in history.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Lastly, follow up the passages with a multiple choice question to test the most complex ideas in learned from the passages, this will serve as a tool for the reader to test what they have learned from this textbook.

Do not include a title or an introduction, simply write the content without headlines and introductory phrases. Do not use images.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_MTSP_BLOGPOST = """# Task

Generate consecutive passages in a blog post style, utilizing the following instructions.

## Instructions

- Write an informative and insightful blog post targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- You will be given a list of topics and subtopics for each topic. You need combine the suitable topics and subtopics for the content generation. If there is no suitable combination, just use one topic and all of its subtopics.

- Assume the reader already has a basic knowledge of the high-level topic, but they are looking to learn more about subtopics.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Your post should delve into the nuances of the topic, offering fresh perspectives and deeper analysis.

- Inform: Provide valuable, well-researched information that educates the reader.

- Engage: Write in a conversational tone that connects with the audience, making complex ideas accessible.

- Illustrate: Use examples, anecdotes, or personal experiences to bring the topic to life.

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this blog post.
Do not give a title and do not start with sentences like "Have you ever..." or "Hello dear readers..", simply write the content without these introductory phrases.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK

_MTSP_WIKIHOW = """# Task

Generate consecutive passages in a Wikihow style, utilizing the following instructions.

## Instructions

- Write a long and very detailed tutorial that could be part of WikiHow targeted at specified persona. You will be given a list of persona and need to select the most suitable one for the content generation.

- You will be given a list of topics and subtopics for each topic. You need combine the suitable topics and subtopics for the content generation. If there is no suitable combination, just use one topic and all of its subtopics.

- Assume the reader already has a basic knowledge of the high-level topic, but they are looking to learn more about subtopics.

- Generate 3-5 consecutive passages exploring the subject, increasing in nuance and detail by passage, by that, I mean, increase the detail and example use of what the reader might learn from the text.

- For each passage, you can select from the list of relevant keywords to guide the content of the passages.

- Include in depth explanations for each step and how it helps achieve the desired outcome, inluding key tips and guidelines.

- Ensure clarity and practicality, allowing readers to easily follow and apply the instructions. Do not use images.,

- Lastly, follow up the passages with a multiple choice question to test the most complex concepts in learned from the passages, this will serve as a tool for the reader to test what they have learned from this WikiHow.
Do not include a title or an introduction, simply write the content without headlines and introductory phrases.

""" + _SEED_SECTIONS_PERSONA + _OUTPUT_BLOCK


TEMPLATES: dict[tuple[str, str | None], str] = {
    ("topic", None): _TOPIC,
    ("topic_styles", "textbook_narrative"): _TOPIC_TEXTBOOK_NARRATIVE,
    ("topic_styles", "textbook_academic"): _TOPIC_TEXTBOOK_ACADEMIC,
    ("topic_styles", "blogpost"): _TOPIC_BLOGPOST,
    ("topic_styles", "wikihow"): _TOPIC_WIKIHOW,
    ("topic_styles_persona", "textbook_narrative"): _TSP_TEXTBOOK_NARRATIVE,
    ("topic_styles_persona", "textbook_academic"): _TSP_TEXTBOOK_ACADEMIC,
    ("topic_styles_persona", "blogpost"): _TSP_BLOGPOST,
    ("topic_styles_persona", "wikihow"): _TSP_WIKIHOW,
    ("multi_topic_styles_persona", "textbook_narrative"): _MTSP_TEXTBOOK_NARRATIVE,
    ("multi_topic_styles_persona", "textbook_academic"): _MTSP_TEXTBOOK_ACADEMIC,
    ("multi_topic_styles_persona", "blogpost"): _MTSP_BLOGPOST,
    ("multi_topic_styles_persona", "wikihow"): _MTSP_WIKIHOW,
}


def get_template(family: str, style: str | None) -> str:
    if family == "topic":
        return TEMPLATES[("topic", None)]
    key = (family, style)
    if key not in TEMPLATES:
        raise KeyError(f"no template for family={family!r}, style={style!r}")
    return TEMPLATES[key]
