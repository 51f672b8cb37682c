"""The agent action list: names, descriptions, and parameter schemas."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Action(str, Enum):
    CREATE_USER = "CreateUser"
    POST = "Post"
    COMMENT = "Comment"
    REPOST = "Repost"
    LIKE = "Like"
    BROWSE = "Browse"
    SELECT_SUBREDDIT = "SelectSubreddit"
    END = "End"


@dataclass(frozen=True)
class ActionInfo:
    name: str
    summary: str
    description: str
    parameters: str
    # fields the backend must supply; ids and users are filled in locally
    schema: tuple[tuple[str, str], ...]

    def expected_schema(self) -> dict[str, str]:
        return dict(self.schema)


_TIME_RULE = 'The format of the time must follow "%Y-%m-%d %H:%M:%S".'

ACTIONS: dict[Action, ActionInfo] = {
    Action.CREATE_USER: ActionInfo(
        name="Create User",
        summary="Create a new user",
        description=(
            "Objective: Create a new user profile.\n"
            "        Parameter Definitions:\n"
            "            'UserID': User ID, randomly generated by a predefined function.\n"
            "            'UserName': User screen name.\n"
            "            'Age': User age.\n"
            "            'Gender': User gender, must be male or female.\n"
            "            'EducationLevel': The user's education level, including options such as high school, "
            "undergraduate, master's, doctoral, and below high school.\n"
            "            'Preference': User interests and hobbies.\n"
            "            'Region': User's country and region.\n"
            "            'UserDescription': User short description, can be related to tasks or preference."
        ),
        parameters=(
            "{'UserID': str, 'UserName': str, 'Age': int, 'Gender': str, 'EducationLevel': str, "
            "'Preference': str, 'Region': str, 'UserDescription': str}"
        ),
        schema=(("UserName", "str"), ("Age", "int"), ("Gender", "str"), ("EducationLevel", "str"),
                ("Preference", "str"), ("Region", "str"), ("UserDescription", "str")),
    ),
    Action.POST: ActionInfo(
        name="Posting",
        summary="Create a post",
        description=(
            "Objective: Create posts based on the information you read.\n"
            "        Parameter Definitions:\n"
            "            'PostID': Post ID, randomly generated by a predefined function.\n"
            "            'PostContent': The main content of the post.\n"
            f"            'PostTime': Posting time. {_TIME_RULE}\n"
            "            'PostUser': Publish the post user."
        ),
        parameters="{'PostID': str, 'PostContent': str, 'PostTime': str, 'PostUser': dict}",
        schema=(("PostContent", "str"), ("PostTime", "str"), ("PostUser", "dict")),
    ),
    Action.COMMENT: ActionInfo(
        name="Comment",
        summary="Comment on a post",
        description=(
            "Comment on a post or comment based on the information you read.\n"
            "        Parameter Definitions:\n"
            "            'ID': The \"Post ID\" or the \"Comment ID\" you want to comment, and you can't create "
            "your own ID.\n"
            "            'CommentID': Comment ID, randomly generated by a predefined function.\n"
            "            'CommentContent': Imitate the sentence pattern of {{CommentExample}} to publish your "
            "comment.\n"
            "            'CommentTime': The comment time should be later than the \"Post Time\" of \"Post ID\" "
            f"or the \"Comment Time\" of \"Comment ID\". {_TIME_RULE}\n"
            "            'CommentUser': Publish the comment user."
        ),
        parameters="{'ID': str, 'CommentID': str, 'CommentContent': str, 'CommentTime': str, 'CommentUser': dict}",
        schema=(("ID", "str"), ("CommentContent", "str"), ("CommentTime", "str"), ("CommentUser", "dict")),
    ),
    Action.REPOST: ActionInfo(
        name="Repost",
        summary="Repost a post",
        description=(
            "Objective: Repost a post based on the information you read.\n"
            "        Parameter Definitions:\n"
            "            'ID': The \"Post ID\" you want to repost, and you can't create your own ID.\n"
            "            'RepostTime': The repost time should be later than the \"Post Time\" corresponding to "
            f"the \"Post ID\". {_TIME_RULE}\n"
            "            'RepostUser': The user who reposts the post."
        ),
        parameters="{'ID': str, 'RepostTime': str, 'RepostUser': dict}",
        schema=(("ID", "str"), ("RepostTime", "str"), ("RepostUser", "dict")),
    ),
    Action.LIKE: ActionInfo(
        name="Like",
        summary="Like a post",
        description=(
            "Objective: Like a post based on the information you read.\n"
            "        Parameter Definitions:\n"
            "            'ID': The \"Post ID\" you want to Like, and you can't create your own ID.\n"
            "            'LikeTime': The like time should be later than the \"Post Time\" corresponding to the "
            f"\"Post ID\". {_TIME_RULE}\n"
            "            'LikeUser': The user who likes the post."
        ),
        parameters="{'ID': str, 'LikeTime': str, 'LikeUser': dict}",
        schema=(("ID", "str"), ("LikeTime", "str"), ("LikeUser", "dict")),
    ),
    Action.BROWSE: ActionInfo(
        name="Browse",
        summary="Browse the message flow",
        description=(
            "Objective: Browse the message flow.\n"
            "        Parameter Definitions:\n"
            f"            'BrowseTime': Planned browsing time from the message flow. {_TIME_RULE}\n"
            "            'BrowseUser': The user who browses the message flow."
        ),
        parameters="{'BrowseTime': str, 'BrowseUser': dict}",
        schema=(("BrowseTime", "str"), ("BrowseUser", "dict")),
    ),
    Action.SELECT_SUBREDDIT: ActionInfo(
        name="Select SubReddit",
        summary="Choose SubReddits to participate in",
        description=(
            "Objective: Choose the SubReddits you will take part in, based on your profile, preferences, "
            "and the posts, comments, and descriptions of each SubReddit.\n"
            "        Parameter Definitions:\n"
            "            'SubReddits': Names of the selected SubReddits."
        ),
        parameters="{'SubReddits': list}",
        schema=(("SubReddits", "list"),),
    ),
    Action.END: ActionInfo(
        name="End",
        summary="Complete the mission",
        description=(
            "Objective: Complete the mission and terminate the action.\n"
            "        Parameter Definitions:\n"
            "            'EndUser': The user who ends the action."
        ),
        parameters="{'EndUser': dict}",
        schema=(("EndUser", "dict"),),
    ),
}

# the five dissemination actions listed in the goal-task prompt
GOAL_ACTIONS = (Action.CREATE_USER, Action.POST, Action.REPOST, Action.COMMENT, Action.LIKE)
# the goal-task list uses the plan vocabulary, which names posting "Post"
GOAL_LABELS = {Action.POST: "Post"}
